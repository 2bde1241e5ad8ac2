"""Bloch band structure and spectral gap detection."""
from dataclasses import dataclass

import numpy as np

from ..discretize import bloch_fiber


@dataclass(frozen=True)
class SpectralGap:
    """Open interval (a, b) free of fiber eigenvalues on the momentum grid.

    ``band_index`` is the number of bands below the gap, i.e. the number of
    eigenvalues below ``a`` per unit cell.
    """

    a: float
    b: float
    resolution: int
    h: float
    band_index: int

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError("gap needs a < b")

    @property
    def width(self):
        return self.b - self.a

    @property
    def center(self):
        return 0.5 * (self.a + self.b)

    def middle_half(self):
        return self.a + self.width / 4, self.b - self.width / 4


def momentum_grid(resolution):
    k = 2 * np.pi * np.arange(resolution) / resolution
    return [(kx, ky) for kx in k for ky in k]


def fiber_eigenvalues(V, k, h, nbands):
    vals = np.linalg.eigvalsh(bloch_fiber(V, k, h).to_dense())
    return vals[:nbands]


def band_table(V, h, momentum_grid_size, nbands=8):
    """Array of shape (len(grid), nbands) with the lowest fiber eigenvalues."""
    ks = momentum_grid(momentum_grid_size)
    return ks, np.array([fiber_eigenvalues(V, k, h, nbands) for k in ks])


def find_gap(V, h, momentum_grid_size, nbands=8):
    """First open interval between consecutive band hulls, or None."""
    if momentum_grid_size < 8:
        raise ValueError("momentum grid must have at least 8 points per axis")
    _, table = band_table(V, h, momentum_grid_size, nbands)
    lo, hi = table.min(axis=0), table.max(axis=0)
    top = np.maximum.accumulate(hi)
    for j in range(1, table.shape[1]):
        below = top[j - 1]
        above = lo[j:].min()
        # relative margin guards against rounding-level "gaps" between touching bands
        if above - below > 1e-9 * max(abs(above), 1.0):
            return SpectralGap(float(below), float(above), int(momentum_grid_size), float(h), j)
    return None
