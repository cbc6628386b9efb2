"""Shared BS/UE precoding codebooks.

Oversampled-DFT surrogate for the standard low-payload codebook: entries
are unit vectors on a DFT angle grid (single layer) or semi-unitary
matrices pairing a DFT vector with its exactly-orthogonal grid companions
(multi layer). Construction is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Codebook", "build_single_layer", "build_multi_layer"]


@dataclass(frozen=True)
class Codebook:
    """Ordered list of semi-unitary codewords shared by BS and UE.

    entries[m] has shape (n_ports, n_layers); single-layer codebooks store
    column vectors of shape (n_ports, 1).
    """

    entries: tuple
    size: int
    n_ports: int
    n_layers: int

    def vector(self, m: int) -> np.ndarray:
        """Codeword m as a flat vector (single-layer codebooks only)."""
        if self.n_layers != 1:
            raise ValueError("vector() requires a single-layer codebook")
        return self.entries[m][:, 0]

    def column(self, m: int, layer: int) -> np.ndarray:
        """Layer `layer` of codeword m as a flat vector."""
        return self.entries[m][:, layer]


def _dft_grid(n_ports: int, size: int) -> np.ndarray:
    """size x n_ports array of oversampled-DFT unit rows."""
    m = np.arange(size)[:, None]
    k = np.arange(n_ports)[None, :]
    return np.exp(2j * np.pi * m * k / size) / np.sqrt(n_ports)


def build_single_layer(n_ports: int, size: int) -> Codebook:
    """Codebook of `size` oversampled-DFT unit vectors over `n_ports` dims."""
    if size < n_ports:
        raise ValueError(f"size ({size}) must be >= n_ports ({n_ports})")
    grid = _dft_grid(n_ports, size)
    entries = tuple(grid[m][:, None].copy() for m in range(size))
    return Codebook(entries=entries, size=size, n_ports=n_ports, n_layers=1)


def build_multi_layer(n_ports: int, n_layers: int, size: int) -> Codebook:
    """Multi-layer codebook with exactly orthonormal columns per entry.

    Layer k of entry m is the single-layer vector at grid index
    (m + k * oversampling) mod size, where oversampling = size / n_ports;
    that spacing makes the columns mutually orthogonal DFT vectors.
    """
    if n_layers > n_ports:
        raise ValueError(f"n_layers ({n_layers}) may not exceed n_ports ({n_ports})")
    if size < n_ports:
        raise ValueError(f"size ({size}) must be >= n_ports ({n_ports})")
    if size % n_ports != 0:
        raise ValueError("size must be a multiple of n_ports for orthogonal layers")
    oversampling = size // n_ports
    grid = _dft_grid(n_ports, size)
    entries = []
    for m in range(size):
        cols = [(m + k * oversampling) % size for k in range(n_layers)]
        entries.append(grid[cols].T.copy())
    return Codebook(entries=tuple(entries), size=size, n_ports=n_ports,
                    n_layers=n_layers)
