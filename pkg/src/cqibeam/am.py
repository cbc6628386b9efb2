"""Alternating-minimization beam estimator.

Fits a beam vector w to magnitude targets sqrt(cqi) observed through the
per-round compressed directions q_t = Q_eff(t) v_t, by alternating exact
minimization over auxiliary phase rotations and a ridge-regularized least
squares step:

    minimize_w,phi  sum_t |q_t^H w|^2 - 2 sqrt(eta_t) Re{q_t^H w e^{j phi_t}}
                    + lam ||w||^2

The phase step has the closed form e^{j phi_t} = conj(a_t)/|a_t| with
a_t = q_t^H w; the w step solves (lam I + sum_t q_t q_t^H) w = b. The
normal matrix is phase-independent and factored once per problem.

The inner loop is dispatched to a compiled kernel when the optional
Cython extension is importable (and CQIBEAM_NO_EXT is unset), otherwise
to an identical pure-NumPy loop.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from . import _am_numpy
from .errors import NumericalError

try:
    if os.environ.get("CQIBEAM_NO_EXT"):
        _am_ext = None
    else:
        from . import _am_kernel as _am_ext
except ImportError:
    _am_ext = None

__all__ = [
    "AmProblem",
    "AmState",
    "AmTrace",
    "backend_name",
    "resolve_rows",
    "phase_update",
    "assemble_normal_matrix",
    "assemble_rhs",
    "w_update",
    "objective",
    "run_am",
]

DEGENERATE_PHASE_TOL = 1e-14


def backend_name() -> str:
    """Active inner-loop backend: 'cython' or 'numpy'."""
    return "numpy" if _am_ext is None else "cython"


def resolve_rows(records, effective_pilots=None, layer: int = 0) -> np.ndarray:
    """Stack the compressed directions q_t^H = (Q_eff(t) v_t)^H as rows.

    v_t is column `layer` of record t's codeword; `effective_pilots`
    overrides each record's pilot matrix (the multi-stream reduction
    substitutes B_k^H Q(t)).
    """
    records = tuple(records)
    if not records:
        raise ValueError("records must be non-empty")
    if effective_pilots is None:
        effective_pilots = [rec.pilot.matrix for rec in records]
    if len(effective_pilots) != len(records):
        raise ValueError("one effective pilot per record required")
    dim = np.asarray(effective_pilots[0]).shape[0]
    rows = np.empty((len(records), dim), dtype=complex)
    for t, (rec, q) in enumerate(zip(records, effective_pilots)):
        q = np.asarray(q)
        if q.shape[0] != dim:
            raise ValueError("effective pilots must share their row dimension")
        v = rec.codeword[:, layer]
        rows[t] = (q @ v).conj()
    return rows


@dataclass(frozen=True)
class AmProblem:
    """Resolved estimation problem over T feedback rounds.

    Attributes:
        rows: (T, dim) complex; row t is (Q_eff(t) v_t)^H.
        sqrt_targets: (T,) nonnegative magnitude targets sqrt(eta_t).
        lam: ridge regularization weight, > 0.
        dim: length of the beam vector being estimated.
        records: source feedback records, kept for traceability.
    """

    rows: np.ndarray
    sqrt_targets: np.ndarray
    lam: float
    dim: int
    records: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("lam must be positive")
        if self.rows.ndim != 2 or self.rows.shape[0] == 0:
            raise ValueError("problem needs at least one feedback row")
        if self.rows.shape[1] != self.dim:
            raise ValueError("row width must equal problem dimension")
        if self.sqrt_targets.shape != (self.rows.shape[0],):
            raise ValueError("one target per row required")

    @property
    def n_rounds(self) -> int:
        return self.rows.shape[0]

    @classmethod
    def from_records(cls, records, lam: float, effective_pilots=None,
                     layer: int = 0, targets=None) -> "AmProblem":
        """Assemble rows and targets from feedback records.

        `layer` selects the codeword column; `targets` overrides the CQI
        values (used with partitioned per-stream CQIs); `effective_pilots`
        is forwarded to resolve_rows.
        """
        records = tuple(records)
        rows = resolve_rows(records, effective_pilots, layer)
        if targets is None:
            targets = [rec.cqi for rec in records]
        targets = np.asarray(targets, dtype=float)
        if np.any(targets < 0):
            raise ValueError("CQI targets must be nonnegative")
        if targets.shape != (rows.shape[0],):
            raise ValueError("one target per record required")
        return cls(rows=rows, sqrt_targets=np.sqrt(targets), lam=float(lam),
                   dim=rows.shape[1], records=records)


@dataclass(frozen=True)
class AmState:
    """Iterate snapshot: beam vector, phase rotations, objective value."""

    w: np.ndarray
    phases: np.ndarray
    objective: float
    iteration: int


@dataclass(frozen=True)
class AmTrace:
    """Convergence record: objective per iteration plus the final state."""

    objectives: np.ndarray
    final: AmState
    converged: bool

    @property
    def iterations(self) -> int:
        return self.final.iteration

    def csv_lines(self):
        """Rows `iteration,objective` (9 significant digits)."""
        yield "iteration,objective"
        for i, obj in enumerate(self.objectives):
            yield f"{i},{obj:.9g}"


def phase_update(problem: AmProblem, w: np.ndarray) -> np.ndarray:
    """Optimal unit-modulus rotations conj(a_t)/|a_t| for fixed w.

    Degenerate rows (|a_t| below ~1e-14) get phase 1: the objective does
    not depend on that phase, and a fixed convention keeps runs
    deterministic.
    """
    a = problem.rows @ np.asarray(w)
    mag = np.abs(a)
    safe = np.where(mag < DEGENERATE_PHASE_TOL, 1.0, mag)
    phases = np.where(mag < DEGENERATE_PHASE_TOL, 1.0 + 0j, a.conj() / safe)
    return phases


def assemble_normal_matrix(problem: AmProblem) -> np.ndarray:
    """Phase-independent normal matrix lam*I + sum_t q_t q_t^H."""
    a = problem.rows.conj().T @ problem.rows
    a += problem.lam * np.eye(problem.dim)
    return 0.5 * (a + a.conj().T)


def assemble_rhs(problem: AmProblem, phases) -> np.ndarray:
    """Right-hand side sum_t sqrt(eta_t) conj(e^{j phi_t}) q_t."""
    phases = np.asarray(phases)
    if phases.shape != (problem.n_rounds,):
        raise ValueError("one phase per feedback row required")
    return problem.rows.conj().T @ (problem.sqrt_targets * phases.conj())


def w_update(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve the Hermitian positive-definite system a w = b.

    Raises NumericalError if `a` is not positive definite or its
    condition number estimate exceeds 1e12.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    try:
        eigvals = np.linalg.eigvalsh(0.5 * (a + a.conj().T))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue estimate failed: {exc}") from exc
    if eigvals[0] <= 0 or eigvals[-1] / eigvals[0] > 1e12:
        raise NumericalError("normal matrix is singular or ill-conditioned")
    return np.linalg.solve(a, b)


def objective(problem: AmProblem, w, phases) -> float:
    """Joint objective at (w, phases); see the module docstring."""
    w = np.asarray(w)
    phases = np.asarray(phases)
    a = problem.rows @ w
    data = np.sum(np.abs(a) ** 2
                  - 2.0 * problem.sqrt_targets * np.real(a * phases))
    return float(data + problem.lam * np.vdot(w, w).real)


def run_am(problem: AmProblem, init_w, tol: float = 1e-8,
           max_iter: int = 500, init_phases=None,
           backend: str | None = None):
    """Alternate phase and beam updates until the objective stalls.

    Returns (unit-norm beam estimate, AmTrace). The trace objective
    sequence is non-increasing, starting from the initial point; the
    stopping rule is |delta| <= tol * max(1, |previous objective|).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    w0 = np.ascontiguousarray(np.asarray(init_w, dtype=complex))
    if w0.shape != (problem.dim,):
        raise ValueError("init_w length must equal problem dimension")
    if not np.all(np.isfinite(w0.view(float))):
        raise ValueError("init_w must be finite")
    if init_phases is None:
        p0 = np.ones(problem.n_rounds, dtype=complex)
    else:
        p0 = np.ascontiguousarray(np.asarray(init_phases, dtype=complex))
        if p0.shape != (problem.n_rounds,):
            raise ValueError("one initial phase per feedback row required")

    a_matrix = assemble_normal_matrix(problem)
    if backend is None:
        kernel = _am_numpy if _am_ext is None else _am_ext
    elif backend == "numpy":
        kernel = _am_numpy
    elif backend == "cython":
        if _am_ext is None:
            raise RuntimeError("compiled kernel is not available")
        kernel = _am_ext
    else:
        raise ValueError(f"unknown backend: {backend!r}")

    rows = np.ascontiguousarray(problem.rows, dtype=complex)
    targets = np.ascontiguousarray(problem.sqrt_targets, dtype=float)
    w, phases, objs, iters, converged = kernel.am_loop(
        rows, targets, a_matrix, w0, p0, problem.lam, tol, max_iter)

    norm = np.linalg.norm(w)
    w_unit = w / norm if norm > 0 else w
    final = AmState(w=w, phases=phases, objective=float(objs[-1]),
                    iteration=iters)
    return w_unit, AmTrace(objectives=objs, final=final,
                           converged=bool(converged))
