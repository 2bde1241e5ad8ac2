"""Exponential localization of gap eigenfunctions at the interface."""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LocalizationProfile:
    value: float
    widths: np.ndarray
    mass: np.ndarray
    slope: float

    def at(self, w):
        """M(w), interpolated linearly in log mass between sampled widths."""
        return float(np.exp(np.interp(w, self.widths, np.log(np.maximum(self.mass, 1e-300)))))


def mass_beyond(vector, x, w):
    """Fraction of |vector|^2 on nodes with |x| > w."""
    p = np.abs(vector) ** 2
    return float(p[np.abs(x) > w].sum() / p.sum())


def localization_profile(pair, x, n, gap=None):
    """M(w) for w = 1..n/2 and the least-squares slope of log M(w)."""
    if gap is not None:
        margin = gap.width / 10
        if not gap.a + margin <= pair.value <= gap.b - margin:
            raise ValueError("eigenvalue must lie inside the gap, (b-a)/10 away from its edges")
    widths = np.arange(1, int(n // 2) + 1, dtype=float)
    mass = np.array([mass_beyond(pair.vector, x, w) for w in widths])
    pos = mass > 0
    slope = float(np.polyfit(widths[pos], np.log(mass[pos]), 1)[0]) if pos.sum() >= 2 else -np.inf
    return LocalizationProfile(float(pair.value), widths, mass, slope)
