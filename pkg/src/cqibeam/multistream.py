"""Sequential multi-beam estimation by null-space deflation.

Beam k is estimated with the single-beam machinery after substituting
the pilots Q(t) with B_k^H Q(t), where B_k spans the orthogonal
complement of the previously estimated beams. The substitution makes
w_k = B_k u_k orthogonal to all earlier beams by construction, so the
stacked output is orthonormal without any explicit constraint handling.

Per-beam magnitude targets come from partitioning each round's scalar
CQI across streams (equal split, or externally supplied oracle
fractions); the ridge weight of each subproblem is tuned independently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .am import AmProblem, run_am
from .bayes import TunerConfig, tune_lambda
from .feedback import partition_cqi

__all__ = [
    "NullBasis",
    "BeamMatrix",
    "null_basis",
    "solve_subproblem_k",
    "run_multistream",
]


@dataclass(frozen=True, eq=False)
class NullBasis:
    """Orthonormal basis of the complement of the prior beam estimates.

    Attributes:
        matrix: n x (n - p) complex, columns orthonormal and orthogonal
            to every prior estimate.
        against: the n x p stacked prior estimates it deflates.
    """

    matrix: np.ndarray
    against: np.ndarray

    def __post_init__(self):
        b = self.matrix
        gram = b.conj().T @ b
        if np.max(np.abs(gram - np.eye(b.shape[1]))) > 1e-10:
            raise ValueError("basis columns must be orthonormal")
        if self.against.shape[1]:
            cross = np.abs(b.conj().T @ self.against)
            if np.max(cross) > 1e-10:
                raise ValueError("basis must annihilate the prior estimates")

    @property
    def width(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True, eq=False)
class BeamMatrix:
    """Stacked unit-norm, mutually orthogonal beamforming vectors."""

    columns: np.ndarray

    def __post_init__(self):
        w = self.columns
        if w.ndim != 2 or w.shape[1] == 0:
            raise ValueError("at least one beam column required")
        gram = w.conj().T @ w
        if np.max(np.abs(gram - np.eye(w.shape[1]))) > 1e-8:
            raise ValueError("beam columns must be orthonormal")

    @property
    def n_streams(self) -> int:
        return self.columns.shape[1]

    def column(self, k: int) -> np.ndarray:
        return self.columns[:, k]


def null_basis(prior, dimension: int) -> NullBasis:
    """Basis of the orthogonal complement of `prior` in C^dimension.

    Empty prior returns the identity. Otherwise the basis is read off
    the SVD of the complement projector I - W W^H, which is numerically
    stabler than completing the prior column by column.
    """
    prior = [np.asarray(v, dtype=complex) for v in prior]
    stacked = (np.column_stack(prior) if prior
               else np.zeros((dimension, 0), dtype=complex))
    if stacked.shape[0] != dimension:
        raise ValueError("prior vectors must have the requested dimension")
    if not prior:
        return NullBasis(matrix=np.eye(dimension, dtype=complex),
                         against=stacked)
    gram = stacked.conj().T @ stacked
    if np.max(np.abs(gram - np.eye(len(prior)))) > 1e-8:
        raise ValueError("prior estimates must be mutually orthonormal")
    if len(prior) >= dimension:
        raise ValueError("prior already spans the space")
    projector = np.eye(dimension) - stacked @ stacked.conj().T
    u, s, _ = np.linalg.svd(0.5 * (projector + projector.conj().T))
    return NullBasis(matrix=u[:, :dimension - len(prior)], against=stacked)


def _reduce(basis: NullBasis, vector, fallback: np.ndarray) -> np.ndarray:
    """Project an ambient vector into the deflated coordinates."""
    if vector is None:
        u = fallback
    else:
        u = basis.matrix.conj().T @ np.asarray(vector, dtype=complex)
    if np.linalg.norm(u) < 1e-9:
        u = fallback
    norm = np.linalg.norm(u)
    return u / norm if norm > 0 else u


def solve_subproblem_k(records, partition_component_k, codeword_column_k: int,
                       basis: NullBasis, tuner_config: TunerConfig | None = None,
                       init_w=None, reference_w=None, tol: float = 1e-8,
                       max_iter: int = 500, out_info: dict | None = None):
    """Estimate beam k inside the deflated subspace; returns an ambient
    unit-norm vector orthogonal to the basis' prior estimates.

    `partition_component_k` holds this stream's CQI share per record;
    `codeword_column_k` selects the codeword column. `init_w` and
    `reference_w` are ambient-space vectors (warm start and phase
    reference); both default to the deflated round-1 codeword beam.
    `out_info`, when given, receives the tuner outcome and the trace.
    """
    records = tuple(records)
    targets = np.asarray(partition_component_k, dtype=float)
    if targets.shape != (len(records),):
        raise ValueError("one partition component per record required")
    effective = [basis.matrix.conj().T @ rec.pilot.matrix for rec in records]

    # deflated round-1 beam direction; a safe default phase reference
    q1 = effective[0] @ records[0].codeword[:, codeword_column_k]
    if np.linalg.norm(q1) < 1e-9:
        q1 = np.zeros(basis.width, dtype=complex)
        q1[0] = 1.0
    ref = _reduce(basis, reference_w, q1)
    init = _reduce(basis, init_w, q1)

    tuned = tune_lambda(records, effective, ref, tuner_config,
                        layer=codeword_column_k, targets=targets)
    problem = AmProblem.from_records(records, tuned.lam,
                                     effective_pilots=effective,
                                     layer=codeword_column_k, targets=targets)
    u, trace = run_am(problem, init, tol=tol, max_iter=max_iter)
    if out_info is not None:
        out_info["tuned"] = tuned
        out_info["trace"] = trace
    w = basis.matrix @ u
    return w / np.linalg.norm(w)


def run_multistream(records, n_streams: int, partition_mode: str = "average",
                    oracle_fractions=None, tuner_config: TunerConfig | None = None,
                    init_beams=None, reference_beams=None, tol: float = 1e-8,
                    max_iter: int = 500, out_info: dict | None = None) -> BeamMatrix:
    """Estimate n_streams orthonormal beams from multi-layer feedback.

    Subproblems are solved in ascending stream order, each deflated
    against the beams found so far. `oracle_fractions` may be a single
    length-n_streams vector or one per record; `init_beams` and
    `reference_beams` are ambient matrices with one column per stream
    (warm starts across rounds). `out_info`, when given, receives the
    per-stream lam values and tuner outcomes.
    """
    records = tuple(records)
    if not records:
        raise ValueError("records must be non-empty")
    if n_streams < 1:
        raise ValueError("n_streams must be >= 1")
    for rec in records:
        if rec.layers < n_streams:
            raise ValueError("records must carry >= n_streams codeword layers")
    fractions = _per_record_fractions(oracle_fractions, len(records), n_streams)
    components = np.empty((len(records), n_streams))
    for t, rec in enumerate(records):
        part = partition_cqi(rec.cqi, n_streams, partition_mode,
                             None if fractions is None else fractions[t])
        components[t] = part.components

    dim = records[0].pilot.matrix.shape[0]
    estimates: list[np.ndarray] = []
    infos = []
    for k in range(n_streams):
        basis = null_basis(estimates, dim)
        info: dict = {}
        w_k = solve_subproblem_k(
            records, components[:, k], k, basis, tuner_config,
            init_w=None if init_beams is None else np.asarray(init_beams)[:, k],
            reference_w=(None if reference_beams is None
                         else np.asarray(reference_beams)[:, k]),
            tol=tol, max_iter=max_iter, out_info=info)
        estimates.append(w_k)
        infos.append(info)
    if out_info is not None:
        out_info["streams"] = infos
        out_info["lams"] = tuple(i["tuned"].lam for i in infos)
    return BeamMatrix(columns=np.column_stack(estimates))


def _per_record_fractions(oracle_fractions, n_records: int, n_streams: int):
    """Normalize oracle fraction input to one vector per record, or None."""
    if oracle_fractions is None:
        return None
    arr = np.asarray(oracle_fractions, dtype=float)
    if arr.ndim == 1:
        if arr.shape != (n_streams,):
            raise ValueError("oracle fractions length must equal n_streams")
        return np.tile(arr, (n_records, 1))
    if arr.shape != (n_records, n_streams):
        raise ValueError("need one fraction vector per record")
    return arr
