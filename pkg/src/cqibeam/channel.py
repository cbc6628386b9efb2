"""Stationary synthetic channel covariances, pilot matrices and eigensolver.

The downlink channel covariance matrix (DCCM) is built directly from a
prescribed eigenvalue profile with Haar-random eigenvectors; all feedback
quantities downstream consume the covariance only through the compressed
Gram matrix Q^H C Q, so the profile fully determines the difficulty of the
estimation problem.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError

__all__ = [
    "Dccm",
    "PilotMatrix",
    "EigenPair",
    "make_dccm",
    "random_semiunitary",
    "dft_pilot",
    "pilot_for_round",
    "effective_gram",
    "hermitian_eig",
]


@dataclass(frozen=True)
class EigenPair:
    """Eigendecomposition result: descending values, orthonormal columns."""

    values: np.ndarray
    vectors: np.ndarray


@dataclass(frozen=True)
class Dccm:
    """Downlink channel covariance matrix with its known eigensystem.

    Attributes:
        matrix: Hermitian PSD covariance, n_antennas x n_antennas.
        rank: number of strictly positive eigenvalues (= user antennas).
        eigenvalues: descending nonnegative values, length `rank`.
        eigenvectors: orthonormal columns, n_antennas x rank.
    """

    matrix: np.ndarray
    rank: int
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n_antennas(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.sum(self.eigenvalues))

    @classmethod
    def from_eigensystem(cls, values, vectors) -> "Dccm":
        """Build a covariance from explicit eigenvalues and eigenvectors.

        `vectors` must have orthonormal columns; `values` must be positive
        and descending. Used by tests to plant known optimal beams.
        """
        values = np.asarray(values, dtype=float)
        vectors = np.asarray(vectors, dtype=complex)
        if vectors.ndim != 2 or vectors.shape[1] != values.size:
            raise ValueError("eigenvector/eigenvalue count mismatch")
        if np.any(values <= 0) or np.any(np.diff(values) > 0):
            raise ValueError("eigenvalues must be positive and descending")
        gram = vectors.conj().T @ vectors
        if not np.allclose(gram, np.eye(values.size), atol=1e-10):
            raise ValueError("eigenvectors must be orthonormal")
        mat = (vectors * values) @ vectors.conj().T
        mat = 0.5 * (mat + mat.conj().T)
        return cls(matrix=mat, rank=values.size, eigenvalues=values,
                   eigenvectors=vectors)


@dataclass(frozen=True)
class PilotMatrix:
    """Semi-unitary pilot weighting matrix for one communication round."""

    matrix: np.ndarray
    round: int
    seed: int | None = None

    @property
    def n_ports(self) -> int:
        return self.matrix.shape[1]


def random_semiunitary(rows: int, cols: int, seed) -> np.ndarray:
    """Seeded complex matrix with orthonormal columns (Q^H Q = I).

    A complex Gaussian draw is orthonormalized by QR with the R diagonal
    forced real-positive, which makes the result unique and Haar
    distributed. Deterministic given `seed`.
    """
    if cols > rows:
        raise ValueError(f"cols ({cols}) may not exceed rows ({rows})")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r).copy()
    d[d == 0] = 1.0
    # absorb diag phases into q so the implied r diagonal is real positive
    return q * (d / np.abs(d))


def make_dccm(n_antennas: int, n_user: int, eigen_profile, seed) -> Dccm:
    """Rank-`n_user` covariance with the requested eigenvalues.

    Eigenvectors are seeded Haar-random orthonormal columns, so the trace
    equals the profile sum exactly (up to rounding) and the principal
    eigenvector is a uniformly random direction.
    """
    profile = np.asarray(eigen_profile, dtype=float)
    if n_user > n_antennas:
        raise ValueError(f"n_user ({n_user}) may not exceed n_antennas ({n_antennas})")
    if profile.size != n_user:
        raise ValueError("eigen_profile length must equal n_user")
    if np.any(profile <= 0):
        raise ValueError("eigen_profile entries must be positive")
    if np.any(np.diff(profile) > 0):
        raise ValueError("eigen_profile must be descending")
    vectors = random_semiunitary(n_antennas, n_user, seed)
    return Dccm.from_eigensystem(profile, vectors)


def dft_pilot(n_antennas: int, n_ports: int) -> PilotMatrix:
    """Broad-beam round-1 pilot: first n_ports columns of the DFT matrix."""
    if n_ports > n_antennas:
        raise ValueError("n_ports may not exceed n_antennas")
    n = np.arange(n_antennas)[:, None]
    k = np.arange(n_ports)[None, :]
    mat = np.exp(-2j * np.pi * n * k / n_antennas) / np.sqrt(n_antennas)
    return PilotMatrix(matrix=mat, round=1, seed=None)


def pilot_for_round(round: int, n_antennas: int, n_ports: int,
                    beam_set, seed: int) -> PilotMatrix:
    """Pilot schedule: a fixed broad-beam sweep first, then random pilots.

    Round 1 returns the first entry of `beam_set`; later rounds draw a
    fresh semi-unitary matrix seeded by (seed, round), so the schedule is
    reproducible and rounds are independent.
    """
    if round < 1:
        raise ValueError("round must be >= 1")
    if round == 1:
        if not beam_set:
            raise ValueError("beam_set must be non-empty at round 1")
        return beam_set[0]
    mat = random_semiunitary(n_antennas, n_ports,
                             np.random.SeedSequence([seed, round]))
    return PilotMatrix(matrix=mat, round=round, seed=seed)


def effective_gram(dccm: Dccm, pilot: PilotMatrix) -> np.ndarray:
    """Port-space compression Q^H C Q of the covariance; Hermitian PSD."""
    q = pilot.matrix
    if q.shape[0] != dccm.n_antennas:
        raise ValueError("pilot rows must match antenna count")
    gram = q.conj().T @ dccm.matrix @ q
    return 0.5 * (gram + gram.conj().T)


def hermitian_eig(m: np.ndarray) -> EigenPair:
    """Eigendecomposition of a Hermitian matrix, values descending.

    Raises NumericalError if the input is not Hermitian to ~1e-10 or the
    underlying routine fails to converge.
    """
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("input must be square")
    scale = max(1.0, float(np.max(np.abs(m))) if m.size else 1.0)
    if np.max(np.abs(m - m.conj().T)) > 1e-10 * scale:
        raise NumericalError("input matrix is not Hermitian")
    try:
        values, vectors = np.linalg.eigh(0.5 * (m + m.conj().T))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    order = np.argsort(values)[::-1]
    return EigenPair(values=values[order], vectors=vectors[:, order])
