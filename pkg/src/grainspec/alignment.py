"""Torus translation orbits and the integer search for aligned heights.

For a rotation angle theta the relevant orbit is
``m -> ((m tan theta)~, (m / cos theta)~)`` on the unit torus, where ``z~``
is the fractional part.  A height ``m`` is aligned with a shift ``t`` when
both ``|(m tan)~ - t|`` and the distance of ``m / cos`` to the nearest
integer are below ``eps / 4``.
"""
import math
from dataclasses import dataclass

import numpy as np

from .potentials import RotationAngle, _angle

_SPLIT = 134217729.0  # 2**27 + 1, Veltkamp splitting constant


def _two_product(a, b):
    """Error-free product: a * b == p + e exactly (Dekker)."""
    p = a * b
    ah = a * _SPLIT
    ah = ah - (ah - a)
    al = a - ah
    bh = b * _SPLIT
    bh = bh - (bh - b)
    bl = b - bh
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def frac_mul(m, x):
    """Fractional part of ``m * x`` for integer ``m`` without product rounding."""
    m = np.asarray(m, dtype=np.float64)
    p, e = _two_product(m, np.float64(x))
    f = p - np.floor(p)
    f = f + e
    return f - np.floor(f)


def circle_dist(z):
    """Distance from the fractional part z in [0, 1) to the nearest integer."""
    return np.minimum(z, 1.0 - z)


@dataclass(frozen=True)
class TorusTranslation:
    theta: RotationAngle

    def __post_init__(self):
        object.__setattr__(self, "theta", _angle(self.theta))

    @property
    def step(self):
        th = self.theta
        return (th.tan - math.floor(th.tan), 1 / th.cos - math.floor(1 / th.cos))

    def iterate(self, m, start=(0.0, 0.0)):
        """Apply the translation ``m`` times by repeated addition mod 1."""
        sx, sy = self.step
        x, y = start
        # Kahan-compensated running sums keep the orbit within a few ulps
        cx = cy = 0.0
        for _ in range(int(m)):
            zx = sx - cx
            tx = x + zx
            cx = (tx - x) - zx
            x = tx
            zy = sy - cy
            ty = y + zy
            cy = (ty - y) - zy
            y = ty
            if x >= 1.0:
                x -= 1.0
            if y >= 1.0:
                y -= 1.0
        return x, y

    def orbit(self, m):
        """Closed form ``((m tan)~, (m / cos)~)`` for an array of integers."""
        th = self.theta
        return frac_mul(m, th.tan), frac_mul(m, 1 / th.cos)


@dataclass(frozen=True)
class AlignmentSolution:
    m: int
    N: int
    theta: RotationAngle
    t: float
    epsilon: float
    residual_x: float
    residual_y: float

    def verify(self):
        fx, fy = TorusTranslation(self.theta).orbit(self.m)
        rx = abs(float(fx) - self.t)
        ry = float(circle_dist(fy))
        N_ok = abs(self.m / self.theta.cos - self.N) < self.epsilon / 4
        return rx < self.epsilon / 4 and ry < self.epsilon / 4 and N_ok


@dataclass(frozen=True)
class SpacedAlignmentSet:
    solutions: tuple
    spacing: int
    horizon: int

    @property
    def density_estimate(self):
        return len(self.solutions) / self.horizon


def _check(t, eps):
    if not 0 < t < 1:
        raise ValueError("alignment shift t must lie in (0, 1)")
    if not eps > 0:
        raise ValueError("eps must be positive")


def _hits(theta, t, eps, lo, hi):
    """Qualifying m in [lo, hi) with their residuals."""
    m = np.arange(lo, hi, dtype=np.int64)
    fx, fy = TorusTranslation(theta).orbit(m)
    rx = np.abs(fx - t)
    ry = circle_dist(fy)
    ok = (rx < eps / 4) & (ry < eps / 4)
    return m[ok], rx[ok], ry[ok]


def _solution(theta, t, eps, m, rx, ry):
    N = int(round(m / theta.cos))
    return AlignmentSolution(int(m), N, theta, float(t), float(eps), float(rx), float(ry))


def find_alignment(theta, t, eps, m_max, chunk=1 << 20):
    """Smallest m <= m_max satisfying both alignment conditions, or None."""
    theta = _angle(theta)
    _check(t, eps)
    if m_max < 1:
        raise ValueError("m_max must be at least 1")
    for lo in range(1, int(m_max) + 1, chunk):
        hi = min(lo + chunk, int(m_max) + 1)
        m, rx, ry = _hits(theta, t, eps, lo, hi)
        if m.size:
            return _solution(theta, t, eps, m[0], rx[0], ry[0])
    return None


def find_spaced_alignments(theta, t, eps, nu, n):
    """Greedy first-fit set of aligned m in (0, n/4) with pairwise spacing >= 2 nu."""
    theta = _angle(theta)
    _check(t, eps)
    if nu < 1 or n < 8 * nu:
        raise ValueError("need nu >= 1 and n >= 8 nu")
    upper = math.ceil(n / 4)
    m, rx, ry = _hits(theta, t, eps, 1, upper)
    keep = m < n / 4
    chosen = []
    last = None
    for mi, xi, yi in zip(m[keep], rx[keep], ry[keep]):
        if last is None or mi - last >= 2 * nu:
            chosen.append(_solution(theta, t, eps, mi, xi, yi))
            last = mi
    return SpacedAlignmentSet(tuple(chosen), int(nu), int(n))


def rational_dependence(theta, denominator_cap, tol=1e-10):
    """Nonzero (n1, n2, n3) with |n_i| <= cap and n1 + n2 tan + n3 sec ~ 0.

    The smallest triple in max-norm is returned, normalised so that its
    first nonzero entry is positive; None when no triple exists in range.
    """
    theta = _angle(theta)
    cap = int(denominator_cap)
    if cap < 1:
        raise ValueError("denominator_cap must be at least 1")
    tan, sec = theta.tan, 1 / theta.cos
    n2, n3 = np.meshgrid(np.arange(-cap, cap + 1), np.arange(-cap, cap + 1), indexing="ij")
    n2, n3 = n2.ravel(), n3.ravel()
    s = n2 * tan + n3 * sec
    n1 = -np.rint(s)
    res = np.abs(n1 + s)
    ok = (res < tol) & (np.abs(n1) <= cap) & ((n2 != 0) | (n3 != 0))
    if not ok.any():
        return None
    cand = np.stack([n1[ok], n2[ok], n3[ok]], axis=1).astype(np.int64)
    sign = np.where(cand[:, 0] != 0, np.sign(cand[:, 0]),
                    np.where(cand[:, 1] != 0, np.sign(cand[:, 1]), np.sign(cand[:, 2])))
    cand = cand * sign[:, None]
    size = np.abs(cand).max(axis=1)
    order = np.lexsort((cand[:, 2], cand[:, 1], cand[:, 0], size))
    return tuple(int(v) for v in cand[order[0]])
