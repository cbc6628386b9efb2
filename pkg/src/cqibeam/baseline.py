"""Comparison beamformers.

The industry-style baseline averages CQI-weighted outer products of the
reported codeword beams and takes principal eigenvectors; it rotates a
fixed round-1 pilot by per-round unitaries, so all its information stays
inside the round-1 column space. The direct codeword beam simply reuses
the round-1 reported precoder.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import PilotMatrix, hermitian_eig, random_semiunitary
from .multistream import BeamMatrix

__all__ = [
    "Accumulator",
    "accumulate",
    "baseline_beams",
    "baseline_pilots",
    "codeword_beam",
]


@dataclass(frozen=True, eq=False)
class Accumulator:
    """Running average (1/t) sum_i cqi_i (Q_i V_i)(Q_i V_i)^H."""

    matrix: np.ndarray
    count: int

    def __post_init__(self):
        m = self.matrix
        scale = max(1.0, float(np.max(np.abs(m))) if m.size else 1.0)
        if np.max(np.abs(m - m.conj().T)) > 1e-12 * scale:
            raise ValueError("accumulator must be Hermitian")
        if self.count < 1:
            raise ValueError("count must be >= 1")


def accumulate(records) -> Accumulator:
    """CQI-weighted average of reported-beam outer products.

    Multi-layer codewords contribute all their columns (the beam matrix
    product Q V spans every reported layer).
    """
    records = tuple(records)
    if not records:
        raise ValueError("records must be non-empty")
    dim = records[0].pilot.matrix.shape[0]
    total = np.zeros((dim, dim), dtype=complex)
    for rec in records:
        beams = rec.pilot.matrix @ rec.codeword
        total += rec.cqi * (beams @ beams.conj().T)
    total /= len(records)
    return Accumulator(matrix=0.5 * (total + total.conj().T),
                       count=len(records))


def baseline_beams(acc: Accumulator, n_streams: int) -> BeamMatrix:
    """Top-n_streams eigenvectors of the accumulator (descending)."""
    if not 1 <= n_streams <= acc.matrix.shape[0]:
        raise ValueError("n_streams must be in [1, accumulator dimension]")
    pair = hermitian_eig(acc.matrix)
    return BeamMatrix(columns=pair.vectors[:, :n_streams])


def baseline_pilots(q1: PilotMatrix, t: int, seed) -> PilotMatrix:
    """Round-t pilot Q(1) O_t with O_t a seeded Haar-random unitary.

    Rotating the fixed round-1 pilot keeps the baseline's observations
    confined to Col(Q(1)); t = 1 returns q1 itself.
    """
    if t < 1:
        raise ValueError("round must be >= 1")
    if t == 1:
        return q1
    n_ports = q1.n_ports
    rotation = random_semiunitary(n_ports, n_ports,
                                  np.random.SeedSequence([seed, t]))
    return PilotMatrix(matrix=q1.matrix @ rotation, round=t, seed=seed)


def codeword_beam(pilot: PilotMatrix, codeword) -> BeamMatrix:
    """Direct use of the reported precoder: beams Q V, already orthonormal."""
    codeword = np.asarray(codeword, dtype=complex)
    if codeword.ndim == 1:
        codeword = codeword[:, None]
    if codeword.shape[0] != pilot.n_ports:
        raise ValueError("codeword rows must match pilot ports")
    beams = pilot.matrix @ codeword
    return BeamMatrix(columns=beams / np.linalg.norm(beams, axis=0))
