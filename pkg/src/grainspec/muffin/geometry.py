"""Muffin-tin geometry: disc lattices on both sides of the interface.

Discs of radius r sit at the cell centres (i + 1/2, j + 1/2).  On x >= 0
the lattice is unrotated; on x < 0 it is rotated by M_theta.
"""
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..potentials import RotationAngle, _angle


@dataclass(frozen=True)
class MuffinSpec:
    r: float
    theta: RotationAngle
    height: float = math.inf

    def __post_init__(self):
        if not 0 < self.r < 0.5:
            raise ValueError("disc radius must satisfy 0 < r < 1/2")
        object.__setattr__(self, "theta", _angle(self.theta))
        if not self.height > 0:
            raise ValueError("barrier height must be positive")


@dataclass(frozen=True)
class CutDisc:
    """Disc of the rotated lattice that meets the y-axis.

    ``xi`` is the signed distance from the centre to the y-axis measured
    towards the axis, so the part left of the axis is {x_local < xi} and
    xi = -center_x.
    """

    j: int
    center: tuple
    xi: float

    @property
    def eta(self):
        return self.center[1]


def enumerate_cut_discs(r, theta, y_max):
    """Rotated-lattice discs with |centre x| < r and centre height in [0, y_max]."""
    th = _angle(theta)
    if not 0 < th.theta <= math.pi / 4 + 1e-15:
        raise ValueError("theta must lie in (0, pi/4]")
    if y_max <= 0:
        raise ValueError("y_max must be positive")
    c, s = th.cos, th.sin
    # centre (p c - q s, p s + q c) with p, q half-integers; |x| < r pins p given q
    q_lo = math.floor(-r * s / c - 1) - 1
    q_hi = math.ceil((y_max + r * s) / c + 1) + 1
    q = np.arange(q_lo, q_hi + 1) + 0.5
    found = []
    for dp in (-1, 0, 1, 2):
        p = np.floor(q * s / c - 0.5) + 0.5 + dp
        cx, cy = p * c - q * s, p * s + q * c
        keep = (np.abs(cx) < r) & (cy >= 0) & (cy <= y_max)
        found.extend(zip(cy[keep], cx[keep]))
    found = sorted(set(found))
    return [CutDisc(j, (float(cx), float(cy)), 0.0 - float(cx)) for j, (cy, cx) in enumerate(found)]


def brute_force_cut_discs(r, theta, y_max):
    """Reference enumeration by scanning a full block of lattice indices."""
    th = _angle(theta)
    R = int(math.ceil(math.hypot(y_max, r))) + 2
    i = np.arange(-R, R + 1) + 0.5
    P, Q = np.meshgrid(i, i, indexing="ij")
    cx, cy = th.rotate(P, Q)
    keep = (np.abs(cx) < r) & (cy >= 0) & (cy <= y_max)
    return sorted(zip(cy[keep].tolist(), cx[keep].tolist()))


def rational_tangent(theta, max_denominator=1000, tol=1e-12):
    """tan(theta) as a Fraction when it is rational with small denominator, else None."""
    tan = _angle(theta).tan
    frac = Fraction(tan).limit_denominator(max_denominator)
    return frac if abs(float(frac) - tan) <= tol * max(1.0, tan) else None


def y_period(theta):
    """Vertical period of the rotated lattice along the y-axis for rational tan(theta)."""
    frac = rational_tangent(theta)
    if frac is None:
        return None
    return math.hypot(frac.numerator, frac.denominator)


def disc_centers(x_lim, y_lim, theta, r):
    """Candidate disc centres near the rectangle: (right lattice, rotated left lattice)."""
    th = _angle(theta)
    R = int(math.ceil(max(map(abs, (*x_lim, *y_lim))) + r)) + 2
    i = np.arange(-R, R + 1) + 0.5
    P, Q = np.meshgrid(i, i, indexing="ij")
    right = np.stack([P.ravel(), Q.ravel()], axis=1)
    lx, ly = th.rotate(P.ravel(), Q.ravel())
    left = np.stack([lx, ly], axis=1)
    return right, left


def disc_mask(X, Y, r, theta, whole_inside=None):
    """Nodes inside the grain-boundary disc set Omega_{r, theta}.

    With ``whole_inside=(x0, x1, y0, y1)`` only discs lying entirely in that
    rectangle count, apart from the cut discs of the interface; box walls
    then never truncate a disc.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    x_lim = (X.min(), X.max())
    y_lim = (Y.min(), Y.max())
    right, left = disc_centers(x_lim, y_lim, theta, r)
    out = np.zeros(X.shape, dtype=bool)
    for centers, side in ((right, X >= 0), (left, X < 0)):
        for cx, cy in centers:
            if cx + r < x_lim[0] or cx - r > x_lim[1] or cy + r < y_lim[0] or cy - r > y_lim[1]:
                continue
            if whole_inside is not None:
                x0, x1, y0, y1 = whole_inside
                cut = abs(cx) < r
                inside = x0 <= cx - r and cx + r <= x1 and y0 <= cy - r and cy + r <= y1
                if not inside and not (cut and y0 <= cy - r and cy + r <= y1):
                    continue
            out |= side & ((X - cx) ** 2 + (Y - cy) ** 2 < r * r)
    return out


def grid_line_mask(X, Y, h, theta):
    """Nodes within h/2 of the lattice lines (rotated on x < 0)."""
    th = _angle(theta)
    U, W = th.rotate(np.asarray(X, float), np.asarray(Y, float), sign=-1)

    def near(z):
        return np.abs(z - np.rint(z)) <= h / 2 + 1e-12

    right = near(X) | near(Y)
    left = near(U) | near(W)
    return np.where(np.asarray(X) >= 0, right, left)
