"""Periodic potentials and their grain-boundary compositions.

A grain potential is split at the line x = 0.  The closed right half-plane
x >= 0 carries the reference crystal; the left half-plane carries a
rotated or translated copy.
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

FAMILIES = ("cosine", "smooth-muffin", "flat")
KINDS = ("rotation", "dislocation", "symmetric-rotation", "symmetric-dislocation", "two-sided")


@dataclass(frozen=True)
class PeriodicPotential:
    """Z^2-periodic Lipschitz potential.

    Families
    --------
    cosine
        ``A (2 + cos 2 pi x + cos 2 pi y)``, Lipschitz constant ``2 pi A sqrt 2``.
    smooth-muffin
        Zero on the disc of radius ``r`` around each cell centre, ramping
        linearly to ``A`` over a shell of width ``w``; Lipschitz constant ``A / w``.
    flat
        Identically zero.
    """

    family: str = "cosine"
    amplitude: float = 0.0
    params: tuple = ()

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown potential family {self.family!r}")
        if not math.isfinite(self.amplitude) or self.amplitude < 0:
            raise ValueError("amplitude must be finite and nonnegative")
        if self.family == "smooth-muffin":
            r, w = self.params
            if not (0 < r < 0.5 and w > 0):
                raise ValueError("smooth-muffin needs 0 < r < 1/2 and w > 0")

    @classmethod
    def cosine(cls, amplitude):
        return cls("cosine", float(amplitude))

    @classmethod
    def smooth_muffin(cls, amplitude, r, w):
        return cls("smooth-muffin", float(amplitude), (float(r), float(w)))

    @classmethod
    def flat(cls):
        return cls("flat", 0.0)

    @property
    def lipschitz_constant(self):
        if self.family == "cosine":
            return 2 * math.pi * self.amplitude * math.sqrt(2.0)
        if self.family == "smooth-muffin":
            return self.amplitude / self.params[1]
        return 0.0

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.family == "cosine":
            return self.amplitude * (2.0 + np.cos(2 * np.pi * x) + np.cos(2 * np.pi * y))
        if self.family == "smooth-muffin":
            r, w = self.params
            dx = x - np.floor(x) - 0.5
            dy = y - np.floor(y) - 0.5
            rho = np.hypot(dx, dy)
            return self.amplitude * np.clip((rho - r) / w, 0.0, 1.0)
        return np.zeros(np.broadcast(x, y).shape)

    evaluate = __call__


@dataclass(frozen=True)
class RotationAngle:
    theta: float
    cos: float = field(init=False)
    sin: float = field(init=False)
    tan: float = field(init=False)

    def __post_init__(self):
        th = float(self.theta)
        if not (-math.pi / 2 < th < math.pi / 2):
            raise ValueError("rotation angle must lie in (-pi/2, pi/2)")
        object.__setattr__(self, "theta", th)
        object.__setattr__(self, "cos", math.cos(th))
        object.__setattr__(self, "sin", math.sin(th))
        object.__setattr__(self, "tan", math.tan(th))

    @classmethod
    def from_tan(cls, tan):
        return cls(math.atan(tan))

    @classmethod
    def from_cos(cls, cos):
        return cls(math.acos(cos))

    def rotate(self, x, y, sign=1):
        """Apply M_theta (sign=+1) or M_-theta (sign=-1) to points."""
        c, s = self.cos, sign * self.sin
        return c * x - s * y, s * x + c * y


def _angle(theta):
    return theta if isinstance(theta, RotationAngle) else RotationAngle(theta)


@dataclass(frozen=True)
class GrainPotential:
    """Piecewise potential with an interface along x = 0.

    ``parameter`` is the angle for rotation kinds and the shift for the
    dislocation and two-sided kinds.  For ``two-sided`` the left piece is
    ``left(x + parameter, y)`` and the right piece is ``right``.
    """

    kind: str
    right: PeriodicPotential
    parameter: float = 0.0
    left: PeriodicPotential = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown grain kind {self.kind!r}")
        p = float(self.parameter)
        if self.kind in ("rotation", "symmetric-rotation") and not 0 <= p < math.pi / 2:
            raise ValueError("rotation angle must lie in [0, pi/2)")
        if self.kind in ("dislocation", "symmetric-dislocation") and not 0 <= p <= 1:
            raise ValueError("dislocation shift must lie in [0, 1]")
        object.__setattr__(self, "parameter", p)
        if self.left is None:
            object.__setattr__(self, "left", self.right)

    @classmethod
    def rotation(cls, V, theta):
        return cls("rotation", V, _angle(theta).theta)

    @classmethod
    def dislocation(cls, V, t):
        return cls("dislocation", V, t)

    @classmethod
    def symmetric_rotation(cls, V, theta):
        return cls("symmetric-rotation", V, _angle(theta).theta)

    @classmethod
    def symmetric_dislocation(cls, V, t):
        return cls("symmetric-dislocation", V, t)

    @classmethod
    def two_sided(cls, left, right, t=0.0):
        return cls("two-sided", right, t, left)

    @property
    def lipschitz_constant(self):
        return max(self.left.lipschitz_constant, self.right.lipschitz_constant)

    def pieces(self, x, y):
        """Values of the (left, right) pieces at the given points."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        p = self.parameter
        if self.kind == "rotation":
            rot = RotationAngle(p)
            return self.left(*rot.rotate(x, y, -1)), self.right(x, y)
        if self.kind == "symmetric-rotation":
            rot = RotationAngle(p / 2)
            return self.left(*rot.rotate(x, y, 1)), self.right(*rot.rotate(x, y, -1))
        if self.kind == "dislocation":
            return self.left(x + p, y), self.right(x, y)
        if self.kind == "symmetric-dislocation":
            return self.left(x + p / 2, y), self.right(x - p / 2, y)
        return self.left(x + p, y), self.right(x, y)

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        left, right = self.pieces(x, y)
        return np.where(x >= 0, right, left)

    evaluate = __call__


def evaluate(potential, x, y):
    """Evaluate a periodic or grain potential at points."""
    return potential(x, y)


def _dist_int(z):
    return np.abs(z - np.rint(z))


def mismatch_bound(theta, t, box, lipschitz, density=100):
    """Sampled sup of the Lipschitz bound on |V_theta - W_t| over ``box``.

    ``box`` is ``(x0, x1, y0, y1)``.  With X = x(cos - 1) - t + y sin and
    Y = -x sin + y(cos - 1) the pointwise bound is
    ``L * min_j |(X, Y) - j|``.  The grid has at least ``density`` samples
    per unit length per axis, plus the corners.
    """
    rot = _angle(theta)
    x0, x1, y0, y1 = map(float, box)
    if not (x1 > x0 and y1 > y0):
        raise ValueError("mismatch_bound needs a nonempty box")
    nx = max(int(math.ceil((x1 - x0) * density)), 1) + 1
    ny = max(int(math.ceil((y1 - y0) * density)), 1) + 1
    xs = np.linspace(x0, x1, nx)
    best = 0.0
    # chunk over y so that large boxes stay within memory
    for ys in np.array_split(np.linspace(y0, y1, ny), max(1, (nx * ny) // 2_000_000 + 1)):
        X = xs[:, None] * (rot.cos - 1) - t + ys[None, :] * rot.sin
        Y = -xs[:, None] * rot.sin + ys[None, :] * (rot.cos - 1)
        d = np.hypot(_dist_int(X), _dist_int(Y))
        best = max(best, float(d.max()))
    return lipschitz * best


def pythagorean_period(theta, max_denominator=10**6, tol=1e-12):
    """y-period p of V_theta when cos(theta) = q/p with p^2 - q^2 a square."""
    c = _angle(theta).cos
    frac = Fraction(c).limit_denominator(max_denominator)
    if abs(float(frac) - c) > tol or frac <= 0:
        return None
    p, q = frac.denominator, frac.numerator
    r = math.isqrt(p * p - q * q)
    return p if r * r == p * p - q * q else None
