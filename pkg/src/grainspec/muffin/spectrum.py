"""Surface spectra of muffin-tin grain boundaries, infinite and finite barrier height."""
import math
from dataclasses import dataclass, field

import numpy as np

from ..discretize import GridSpec, NodeValues, assemble
from ..eigensolve import count_below, count_interval, eigenpairs_near
from .discs import cut_disc_window
from .geometry import disc_mask, enumerate_cut_discs, y_period


class MuffinError(RuntimeError):
    """Inconsistent muffin-tin geometry (e.g. a rational angle without periodic cuts)."""


@dataclass
class SurfaceSpectrum:
    r: float
    theta: float
    window: tuple
    discs: list
    rows: list
    period: float = None

    def values(self):
        return np.sort(np.concatenate([v for _, v in self.rows] or [np.empty(0)]))

    def distinct(self, tol=1e-9):
        out = []
        for v in self.values():
            if not out or v - out[-1] > tol * max(1.0, abs(v)):
                out.append(float(v))
        return out

    def hits(self, pieces):
        """Number of surface eigenvalues in each of ``pieces`` equal parts of the window."""
        a, b = self.window
        edges = np.linspace(a, b, pieces + 1)
        vals = self.values()
        return [int(np.count_nonzero((vals > lo) & (vals < hi)))
                for lo, hi in zip(edges[:-1], edges[1:])]


def _check_periodic(discs, period, tol=1e-9):
    first = sorted(round(d.xi, 9) for d in discs if d.eta < period)
    second = sorted(round(d.xi, 9) for d in discs if period <= d.eta < 2 * period)
    if len(first) != len(second) or any(abs(u - v) > tol for u, v in zip(first, second)):
        raise MuffinError("cut parameters of a rational angle are not periodic in y")


class _WindowItem:
    def __init__(self, r, a, b, h):
        self.r, self.a, self.b, self.h = r, a, b, h

    def __call__(self, xi):
        return cut_disc_window(self.r, xi, self.a, self.b, self.h)


def muffin_surface_spectrum(r, theta, gap, y_max, h=None, mapper=map):
    """Eigenvalues inside the gap of every cut disc up to height y_max.

    ``gap`` is a pair (a, b).  Equal cut parameters share one computation.
    For rational tan(theta) the cut list is checked for y-periodicity when
    y_max covers two periods.
    """
    a, b = (float(v) for v in gap)
    discs = enumerate_cut_discs(r, theta, y_max)
    period = y_period(theta)
    if period is not None and y_max >= 2 * period:
        _check_periodic(discs, period)
    keys = sorted({round(d.xi, 12) for d in discs})
    cache = dict(zip(keys, mapper(_WindowItem(r, a, b, h), keys)))
    rows = [(d.j, cache[round(d.xi, 12)]) for d in discs]
    th = float(getattr(theta, "theta", theta))
    return SurfaceSpectrum(float(r), th, (a, b), discs, rows, period)


@dataclass
class HeightTable:
    """Tracked eigenvalues (fixed global indices) versus barrier height."""

    heights: list
    indices: list
    values: np.ndarray
    limit: np.ndarray
    continuum: list = field(default_factory=list)

    def differences(self):
        """|lambda(n_{i+1}) - lambda(n_i)| per tracked index, shape (len(heights) - 1, k)."""
        return np.abs(np.diff(self.values, axis=0))

    def monotone(self, slack=1e-9):
        return bool(np.all(np.diff(self.values, axis=0) >= -slack * np.abs(self.values[1:])))

    def rows(self):
        return [(hgt, idx, float(v)) for hgt, vals in zip(self.heights, self.values)
                for idx, v in zip(self.indices, vals)]


def muffin_grid(r, theta, box, h):
    """Grid on ``box`` and the mask of disc nodes; only whole discs (plus cut discs) count."""
    x0, x1, y0, y1 = box
    grid = GridSpec.rect((x0, x1), (y0, y1), h)
    x, y = grid.nodes()
    X, Y = np.meshgrid(x, y, indexing="ij")
    return grid, disc_mask(X, Y, r, theta, whole_inside=box)


def finite_height_operator(grid, omega, height):
    return assemble(NodeValues(grid, height * (~omega)), grid, quad=1)


def infinite_wall_operator(grid, omega):
    """Barrier nodes deleted: Dirichlet Laplacian on the disc nodes."""
    return assemble(NodeValues(grid, np.zeros(omega.shape)), grid, quad=1, mask=omega)


def _slice(op, lo, hi):
    """Eigenvalues in [lo, hi) and the number of eigenvalues below lo."""
    below = count_below(op, lo).negatives
    k = count_below(op, hi).negatives - below
    if k == 0:
        return below, []
    vals = sorted(p.value for p in eigenpairs_near(op, 0.5 * (lo + hi), k))
    return below, [v for v in vals if lo <= v < hi]


class _HeightItem:
    def __init__(self, grid, omega, lo, hi, indices):
        self.grid, self.omega, self.lo, self.hi, self.indices = grid, omega, lo, hi, indices

    def __call__(self, height):
        op = finite_height_operator(self.grid, self.omega, height)
        lo = self.lo
        # lambda_k(height) <= lambda_k(infinity) < hi; widen down until index min(indices) is in
        while True:
            below, vals = _slice(op, lo, self.hi)
            if below <= self.indices[0]:
                break
            lo -= 0.5 * (self.hi - lo)
        return [vals[k - below] for k in self.indices]


def finite_height_convergence(r, theta, heights, gap, h, box=(-2.0, 2.0, 0.0, 4.0), mapper=map):
    """Gap eigenvalues of -Laplace + height * V_{r,theta} on a Dirichlet box.

    The tracked eigenvalues are those whose infinite-wall limit (barrier
    nodes deleted) lies in ``gap``; they are followed by global index, so
    the table is exact under the min-max ordering and nondecreasing in the
    height.  ``continuum`` lists the continuum cut-disc eigenvalues in the
    gap for reference.
    """
    heights = [float(v) for v in heights]
    if any(q <= p for p, q in zip(heights, heights[1:])):
        raise ValueError("heights must be increasing")
    a, b = (float(v) for v in gap)
    grid, omega = muffin_grid(r, theta, box, h)
    limit_op = infinite_wall_operator(grid, omega)
    below, limit = _slice(limit_op, a, b)
    if not limit:
        return HeightTable(heights, [], np.empty((len(heights), 0)), np.empty(0))
    indices = list(range(below, below + len(limit)))
    lo = a - 0.5 * (b - a)
    values = np.array(list(mapper(_HeightItem(grid, omega, lo, b, indices), heights)))
    x0, x1, y0, y1 = box
    continuum = []
    if y1 > 0:
        spec = muffin_surface_spectrum(r, theta, (a, b), y1, h=min(h, r / 32))
        continuum = spec.distinct()
    return HeightTable(heights, indices, values, np.array(limit), continuum)
