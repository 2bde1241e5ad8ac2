"""Dislocation spectral flow on stretched strips and cut-off eigenfunctions."""
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from ..discretize import GridSpec, StretchedCellSpec, assemble, assemble_stretched
from ..eigensolve import Factorization, count_below, eigenpairs_near
from ..potentials import GrainPotential


class FlowError(RuntimeError):
    """Endpoint counts violate the per-period law, or no crossing was found."""


class ConstructionError(RuntimeError):
    """The cut-off eigenfunction has a residual above the gap half-width."""


@dataclass
class FlowRecord:
    potential: object
    gap: object
    n: int
    h: float
    t_grid: np.ndarray
    counts_below_a: dict
    branches: list
    crossings: list = field(default_factory=list)

    def crossing(self, E):
        """First crossing parameter recorded for energy E, or None."""
        ts = [t for e, t in self.crossings if e == E]
        return min(ts) if ts else None

    def rows(self):
        """(t, branch, lambda, count_below_a) rows sorted by t then branch."""
        out = []
        by_t = {}
        for b, branch in enumerate(self.branches):
            for t, lam in branch:
                by_t.setdefault(t, []).append((b, lam))
        for t in sorted(self.counts_below_a):
            entries = sorted(by_t.get(t, []))
            if not entries:
                out.append((t, -1, float("nan"), self.counts_below_a[t]))
            for b, lam in entries:
                out.append((t, b, lam, self.counts_below_a[t]))
        return out


def stretched_operator(V, n, t, h):
    return assemble_stretched(GrainPotential.dislocation(V, t), StretchedCellSpec(t, n, h))


def gap_sample(V, gap, n, h, t):
    """Count below a and the sorted eigenvalues inside (a, b) at parameter t."""
    op = stretched_operator(V, n, t, h)
    below_a = count_below(op, gap.a).negatives
    k = count_below(op, gap.b).negatives - below_a
    vals = []
    if k:
        vals = sorted(p.value for p in eigenpairs_near(op, gap.center, k))
    return t, below_a, vals


def _match(prev, cur, tol):
    """Greedy nearest-value matching; returns list of (i, j) index pairs."""
    cand = sorted((abs(p - c), i, j) for i, p in enumerate(prev) for j, c in enumerate(cur))
    used_i, used_j, pairs = set(), set(), []
    for d, i, j in cand:
        if d > tol:
            break
        if i not in used_i and j not in used_j:
            used_i.add(i)
            used_j.add(j)
            pairs.append((i, j))
    return pairs


def _needs_refinement(prev, cur, pairs, gap, tol):
    mi = {i for i, _ in pairs}
    mj = {j for _, j in pairs}
    near_edge = lambda v: min(v - gap.a, gap.b - v) < tol
    return (any(not near_edge(v) for i, v in enumerate(prev) if i not in mi)
            or any(not near_edge(v) for j, v in enumerate(cur) if j not in mj))


def dislocation_flow(V, gap, n, t_steps, h=None, energies=(), mapper=map, max_refine=6):
    """Track gap eigenvalues of the stretched strip as t runs over [0, 1].

    ``mapper`` evaluates independent t samples (e.g. an executor's ``map``);
    results are merged in t order, so output does not depend on it.
    """
    if t_steps < 16:
        raise ValueError("t_steps must be at least 16")
    h = gap.h if h is None else h
    m = gap.band_index
    ts = list(np.linspace(0.0, 1.0, t_steps + 1))
    samples = {t: (c, v) for t, c, v in mapper(_Sampler(V, gap, n, h), ts)}
    c0, c1 = samples[0.0][0], samples[1.0][0]
    if c0 != 2 * n * m or c1 != (2 * n + 1) * m:
        raise FlowError(
            f"count below a is {c0} at t=0 and {c1} at t=1, expected {2 * n * m} and "
            f"{(2 * n + 1) * m}: mesh too coarse or gap misidentified")
    tol = 0.1 * gap.width
    # refine intervals whose eigenvalues jump by more than 10% of the gap
    for _ in range(max_refine):
        order = sorted(samples)
        new_t = []
        for t0, t1 in zip(order[:-1], order[1:]):
            prev, cur = samples[t0][1], samples[t1][1]
            pairs = _match(prev, cur, tol)
            if _needs_refinement(prev, cur, pairs, gap, tol):
                new_t.append(0.5 * (t0 + t1))
        if not new_t:
            break
        for t, c, v in mapper(_Sampler(V, gap, n, h), new_t):
            samples[t] = (c, v)
    order = sorted(samples)
    branches = []
    live = {}
    for k, t in enumerate(order):
        vals = samples[t][1]
        if k == 0:
            assign = {}
        else:
            prev = samples[order[k - 1]][1]
            assign = {j: live[i] for i, j in _match(prev, vals, tol) if i in live}
        nxt = {}
        for j, lam in enumerate(vals):
            b = assign.get(j)
            if b is None:
                b = len(branches)
                branches.append([])
            branches[b].append((t, lam))
            nxt[j] = b
        live = nxt
    record = FlowRecord(V, gap, n, h, np.array(order),
                        {t: samples[t][0] for t in order}, branches)
    for E in energies:
        for tE in find_crossings(V, n, h, E, order):
            record.crossings.append((float(E), tE))
        if record.crossing(float(E)) is None:
            raise FlowError(f"no crossing found for E={E!r}")
    return record


class _Sampler:
    """Picklable per-t work item."""

    def __init__(self, V, gap, n, h):
        self.V, self.gap, self.n, self.h = V, gap, n, h

    def __call__(self, t):
        return gap_sample(self.V, self.gap, self.n, self.h, float(t))


def _count_at(V, n, h, E, t):
    return count_below(stretched_operator(V, n, t, h), E).negatives


def _nearest(V, n, h, E, t):
    op = stretched_operator(V, n, t, h)
    return eigenpairs_near(op, E, 1)[0].value - E


def refine_crossing(V, n, h, E, t_lo, t_hi, c_lo=None, c_hi=None, t_tol=1e-7):
    """Parameter where an eigenvalue branch passes through E inside [t_lo, t_hi]."""
    c_lo = _count_at(V, n, h, E, t_lo) if c_lo is None else c_lo
    c_hi = _count_at(V, n, h, E, t_hi) if c_hi is None else c_hi
    while t_hi - t_lo > t_tol:
        mid = 0.5 * (t_lo + t_hi)
        c = _count_at(V, n, h, E, mid)
        if c != c_lo:
            t_hi, c_hi = mid, c
        else:
            t_lo = mid
    g_lo, g_hi = _nearest(V, n, h, E, t_lo), _nearest(V, n, h, E, t_hi)
    if g_lo * g_hi < 0:
        return brentq(lambda s: _nearest(V, n, h, E, s), t_lo, t_hi, xtol=1e-15, rtol=1e-15)
    return t_lo if abs(g_lo) <= abs(g_hi) else t_hi


def find_crossings(V, n, h, E, t_grid):
    """All crossing parameters of energy E detected on ``t_grid``."""
    ts = sorted(t_grid)
    counts = [_count_at(V, n, h, E, t) for t in ts]
    out = []
    for (t0, c0), (t1, c1) in zip(zip(ts, counts), zip(ts[1:], counts[1:])):
        if c0 != c1:
            out.append(float(refine_crossing(V, n, h, E, t0, t1, c0, c1)))
    return out


def crossing_eigenvalue(V, n, h, E, tE):
    """Eigenvalue of the stretched strip at tE nearest E."""
    return eigenpairs_near(stretched_operator(V, n, tE, h), E, 1)[0]


def cutoff(s):
    """Smooth cutoff: 1 on |s| <= 1/4, 0 on |s| >= 1/2."""
    s = np.abs(np.asarray(s, dtype=float))
    z = np.clip((0.5 - s) * 4.0, 0.0, 1.0)

    def g(u):
        out = np.zeros_like(u)
        pos = u > 0
        out[pos] = np.exp(-1.0 / u[pos])
        return out

    return g(z) / (g(z) + g(1.0 - z))


@dataclass
class ApproximateEigenfunction:
    u: np.ndarray
    E: float
    t: float
    n: int
    h: float
    residual: float
    potential: object = None

    @property
    def support(self):
        return (-self.n / 2, self.n / 2, -self.n / 2, self.n / 2)


def plane_dislocation_box(V, t, n, h, center=0.0):
    return assemble(GrainPotential.dislocation(V, t), GridSpec.box(n, h, (0.0, center)))


def build_approximate_eigenfunction(flow, E, n, h=None, strict=True):
    """Cut-off strip eigenfunction on the plane box Q_n and its residual.

    The crossing is re-located on the strip of half-length ``n``, starting
    from the crossings recorded in ``flow``.
    """
    V = flow.potential
    h = flow.h if h is None else h
    t_guess = flow.crossing(float(E))
    if t_guess is None:
        raise FlowError(f"energy {E!r} has no crossing in the flow record")
    tE = _crossing_near(V, n, h, E, t_guess)
    spec = StretchedCellSpec(tE, n, h)
    strip = stretched_operator(V, n, tE, h)
    v = eigenpairs_near(strip, E, 1)[0].vector
    xs, ys = spec.nodes()
    grid = v.reshape(xs.size, ys.size)
    box = GridSpec.box(n, h)
    X, Y = box.nodes()
    rows = np.zeros((X.size, ys.size))
    left, right = xs < 0, xs >= 0
    inside = np.abs(X) < n / 2
    for sel, target in ((left, inside & (X < 0)), (right, inside & (X >= 0))):
        spline = CubicSpline(xs[sel], grid[sel], axis=0)
        rows[target] = spline(X[target])
    # y-periodic extension: box heights share the strip's lattice mod 1
    jy = np.rint((Y - ys[0]) / h).astype(int) % ys.size
    u = rows[:, jy] * cutoff(X / n)[:, None] * cutoff(Y / n)[None, :]
    u = u.ravel()
    u /= np.linalg.norm(u)
    D = plane_dislocation_box(V, tE, n, h)
    residual = float(np.linalg.norm(D.matvec(u) - E * u))
    if strict and residual > flow.gap.width / 2:
        raise ConstructionError(
            f"cut-off residual {residual:.4g} exceeds the gap half-width at n={n}")
    return ApproximateEigenfunction(u, float(E), float(tE), int(n), float(h), residual, V)


def _crossing_near(V, n, h, E, t_guess):
    for delta in (0.02, 0.05, 0.1, 0.2, 0.5, 1.0):
        lo, hi = max(0.0, t_guess - delta), min(1.0, t_guess + delta)
        c_lo, c_hi = _count_at(V, n, h, E, lo), _count_at(V, n, h, E, hi)
        if c_lo != c_hi:
            return float(refine_crossing(V, n, h, E, lo, hi, c_lo, c_hi))
    raise FlowError(f"no crossing of E={E!r} on the strip of half-length {n}")
