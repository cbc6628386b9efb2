"""UE-side limited feedback: PMI selection, CQI computation and partition.

The UE sees only the port-space Gram matrix Q^H C Q. It reports the index
of the codeword maximizing the trace criterion (PMI) and the achieved
trace value (CQI), the latter quantized to 32 bits as a binary32 float.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import Dccm, PilotMatrix, effective_gram
from .codebook import Codebook

__all__ = [
    "FeedbackRecord",
    "CqiPartition",
    "select_pmi",
    "compute_cqi",
    "quantize_cqi",
    "partition_cqi",
    "make_feedback",
]


@dataclass(frozen=True, eq=False)
class FeedbackRecord:
    """One round's feedback: pilot used, selected PMI and quantized CQI.

    The selected codeword is stored resolved (n_ports x n_layers array)
    so downstream consumers never need the codebook itself.
    """

    round: int
    pilot: PilotMatrix
    pmi: int
    cqi: float
    codeword: np.ndarray

    @property
    def layers(self) -> int:
        return self.codeword.shape[1]

    def csv_row(self) -> str:
        """Serialize as `round,pmi,cqi,pilot_seed` (9 significant digits)."""
        seed = "" if self.pilot.seed is None else str(self.pilot.seed)
        return f"{self.round},{self.pmi},{self.cqi:.9g},{seed}"


@dataclass(frozen=True)
class CqiPartition:
    """Per-stream split of one CQI value; components sum to the parent."""

    components: np.ndarray


def select_pmi(gram: np.ndarray, codebook: Codebook) -> int:
    """Index of the codeword maximizing Tr(V^H G V); ties -> lowest index."""
    gram = np.asarray(gram)
    if gram.shape != (codebook.n_ports, codebook.n_ports):
        raise ValueError("gram dimension must match codebook ports")
    values = [float(np.real(np.trace(v.conj().T @ gram @ v)))
              for v in codebook.entries]
    return int(np.argmax(values))


def compute_cqi(gram: np.ndarray, codeword: np.ndarray) -> float:
    """Achieved trace Tr(V^H G V) >= 0 for a semi-unitary codeword."""
    gram = np.asarray(gram)
    codeword = np.asarray(codeword)
    if codeword.ndim == 1:
        codeword = codeword[:, None]
    if gram.shape[0] != gram.shape[1] or codeword.shape[0] != gram.shape[0]:
        raise ValueError("gram/codeword dimension mismatch")
    value = float(np.real(np.trace(codeword.conj().T @ gram @ codeword)))
    return max(value, 0.0)


def quantize_cqi(value: float, bits: int = 32) -> float:
    """CQI quantizer: round to the nearest binary32 float. Idempotent."""
    if bits != 32:
        raise ValueError("only the 32-bit CQI budget is supported")
    if not np.isfinite(value) or value < 0:
        raise ValueError("CQI must be finite and nonnegative")
    return float(np.float32(value))


def partition_cqi(cqi: float, n_streams: int, mode: str = "average",
                  fractions=None) -> CqiPartition:
    """Split a total CQI into per-stream components.

    `average` divides equally; `oracle` applies externally supplied
    fractions (summing to 1), standing in for known per-stream separation.
    """
    if n_streams < 1:
        raise ValueError("n_streams must be >= 1")
    if mode == "average":
        components = np.full(n_streams, cqi / n_streams)
    elif mode == "oracle":
        if fractions is None:
            raise ValueError("oracle mode requires fractions")
        fractions = np.asarray(fractions, dtype=float)
        if fractions.shape != (n_streams,):
            raise ValueError("fractions length must equal n_streams")
        if np.any(fractions < 0) or abs(fractions.sum() - 1.0) > 1e-9:
            raise ValueError("fractions must be nonnegative and sum to 1")
        components = cqi * fractions
    else:
        raise ValueError(f"unknown partition mode: {mode!r}")
    return CqiPartition(components=components)


def make_feedback(dccm: Dccm, pilot: PilotMatrix, codebook: Codebook) -> FeedbackRecord:
    """Full UE feedback for one round: Gram -> PMI -> CQI -> quantize.

    Multi-layer codewords are stored with columns sorted by captured
    power v^H G v (strongest first), so layer k consistently maps to
    stream k downstream. The ordering uses only the UE-side Gram matrix
    and leaves the selection criterion and the CQI unchanged.
    """
    gram = effective_gram(dccm, pilot)
    pmi = select_pmi(gram, codebook)
    codeword = codebook.entries[pmi]
    if codeword.shape[1] > 1:
        per_column = np.real(np.einsum("pk,pq,qk->k", codeword.conj(), gram,
                                       codeword))
        codeword = codeword[:, np.argsort(-per_column, kind="stable")]
    cqi = quantize_cqi(compute_cqi(gram, codeword))
    return FeedbackRecord(round=pilot.round, pilot=pilot, pmi=pmi, cqi=cqi,
                          codeword=codeword)
