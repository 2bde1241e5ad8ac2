"""Gap filling and eigenvalue-count scaling for rotated grain boundaries."""
import math
from dataclasses import dataclass, field

import numpy as np

from ..alignment import find_alignment
from ..discretize import GridSpec, assemble
from ..eigensolve import count_below, count_interval, eigenpairs_near
from ..potentials import GrainPotential, _angle, mismatch_bound
from .flow import plane_dislocation_box

INTERFACE_MASS = 0.5


def rotation_box(V, theta, n, h, center=0.0):
    """R_theta on the Dirichlet box Q_n(0, center)."""
    return assemble(GrainPotential.rotation(V, _angle(theta).theta), GridSpec.box(n, h, (0.0, center)))


def interface_fraction(vector, x, width):
    """Share of |vector|^2 carried by nodes with |x| < width."""
    w = np.abs(vector) ** 2
    return float(w[np.abs(x) < width].sum() / w.sum())


def window_pairs(op, alpha, beta):
    """All eigenpairs with eigenvalue in [alpha, beta)."""
    lo = count_below(op, alpha).negatives
    k = count_below(op, beta).negatives - lo
    if k == 0:
        return []
    pairs = eigenpairs_near(op, 0.5 * (alpha + beta), k)
    return sorted((p for p in pairs if alpha <= p.value < beta), key=lambda p: p.value)


def interface_pairs(op, alpha, beta, n, width=None):
    """Window eigenpairs whose mass sits mostly within |x| < width (default n/4)."""
    width = n / 4 if width is None else width
    return [p for p in window_pairs(op, alpha, beta)
            if interface_fraction(p.vector, op.x, width) > INTERFACE_MASS]


def partition(lo, hi, eps):
    k = max(1, int(round((hi - lo) / eps)))
    return np.linspace(lo, hi, k + 1)


@dataclass(frozen=True)
class FillRow:
    theta: float
    n: int
    alpha: float
    beta: float
    count: int
    interface_count: int
    residual: float
    center: float = 0.0


@dataclass
class FillReport:
    rows: list
    window: tuple
    alignments: dict = field(default_factory=dict)

    def thetas(self):
        return sorted({r.theta for r in self.rows})

    def filled(self, theta, interface=True):
        sel = [r for r in self.rows if r.theta == theta]
        return all((r.interface_count if interface else r.count) >= 1 for r in sel)

    def theta_eps(self, interface=True):
        """Largest tested theta such that every tested theta <= it fills all subintervals."""
        best = None
        for th in self.thetas():
            if not self.filled(th, interface):
                break
            best = th
        return best


def translated_residual(aef, V, theta, N):
    """Residual of the approximate eigenfunction moved to height N against R_theta.

    Returns (residual against R_theta, residual against D_t, sampled mismatch
    bound over the support enlarged by one mesh cell).
    """
    n, h = aef.n, aef.h
    R = rotation_box(V, theta, n, h, center=float(N))
    u = aef.u
    res_R = float(np.linalg.norm(R.matvec(u) - aef.E * u))
    D = plane_dislocation_box(V, aef.t, n, h)
    res_D = float(np.linalg.norm(D.matvec(u) - aef.E * u))
    x0, x1, y0, y1 = aef.support
    box = (x0 - h, x1 + h, N + y0 - h, N + y1 + h)
    bound = mismatch_bound(theta, aef.t, box, V.lipschitz_constant)
    return res_R, res_D, bound


class _FillItem:
    def __init__(self, V, edges, n, h, aef, eps, m_max, width, shifts):
        self.V, self.edges, self.n, self.h = V, edges, n, h
        self.aef, self.eps, self.m_max, self.width = aef, eps, m_max, width
        self.shifts = shifts

    def _box_counts(self, theta, center, lo, hi):
        op = rotation_box(self.V, theta, self.n, self.h, center=center)
        count = count_interval(op, lo, hi)
        inside = len(interface_pairs(op, lo, hi, self.n, self.width))
        return count, inside

    def __call__(self, theta):
        eps_len = self.eps / self.V.lipschitz_constant
        residual, align = float("nan"), None
        if self.aef is not None:
            sol = find_alignment(theta, self.aef.t, eps_len, self.m_max)
            if sol is not None:
                res_R, res_D, bound = translated_residual(self.aef, self.V, theta, sol.N)
                residual = res_R
                align = (sol, res_R, res_D, bound)
        rows, centers = [], []
        for k in range(len(self.edges) - 1):
            lo, hi = self.edges[k], self.edges[k + 1]
            if self.shifts is None:
                center = 0.0
            else:
                sol = find_alignment(theta, self.shifts[k], eps_len, self.m_max)
                center = None if sol is None else float(sol.N)
            if center is None:
                count, inside = 0, 0
            else:
                count, inside = self._box_counts(theta, center, lo, hi)
            centers.append(center)
            rows.append(FillRow(float(theta), int(self.n), float(lo), float(hi),
                                int(count), int(inside), residual, center))
        return rows, align


def subinterval_shifts(V, gap, edges, n, h, flow):
    """Crossing parameter t_E on the strip of half-length n for each subinterval centre."""
    from .flow import _crossing_near

    shifts = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        E = 0.5 * (lo + hi)
        guess = flow.crossing(float(E))
        if guess is None:
            ts = [t for e, t in flow.crossings]
            es = [e for e, t in flow.crossings]
            guess = float(np.interp(E, sorted(es), [t for _, t in sorted(zip(es, ts))]))
        shifts.append(_crossing_near(V, n, h, E, guess))
    return shifts


def rotation_gap_fill(V, gap, eps, thetas, n, h=None, window=None, aef=None, flow=None,
                      placement="aligned", m_max=10**7, mapper=map, interface_width=None):
    """Interval counts of R_theta on boxes of half-width n for each theta.

    The window (default the whole gap) is split uniformly into pieces of
    length about ``eps``.  With ``placement="origin"`` every piece is
    counted on Q_n centred at the origin.  With ``placement="aligned"`` the
    piece with centre E is counted on Q_n(0, N), where N is the aligned
    height for (theta, t_E, eps / L) and t_E is the dislocation crossing of
    E (this needs ``flow``).  When an approximate eigenfunction ``aef`` is
    given, its translated residual is recorded on every row of that theta.
    """
    if not eps < gap.width / 2:
        raise ValueError("eps must be below half the gap width")
    if placement not in ("aligned", "origin"):
        raise ValueError(f"unknown placement {placement!r}")
    h = gap.h if h is None else h
    lo, hi = window if window is not None else (gap.a, gap.b)
    edges = partition(lo, hi, eps)
    thetas = sorted(float(_angle(t).theta) for t in thetas)
    if any(t <= 0 for t in thetas):
        raise ValueError("gap filling needs theta > 0")
    shifts = None
    if placement == "aligned":
        if flow is None:
            raise ValueError("aligned placement needs a flow record")
        shifts = subinterval_shifts(V, gap, edges, n, h, flow)
    item = _FillItem(V, edges, n, h, aef, eps, m_max, interface_width, shifts)
    report = FillReport([], (lo, hi))
    report.shifts = shifts
    for theta, (rows, align) in zip(thetas, mapper(item, thetas)):
        report.rows.extend(rows)
        if align is not None:
            report.alignments[theta] = align
    report.rows.sort(key=lambda r: (r.theta, r.alpha))
    return report


@dataclass(frozen=True)
class ScalingRow:
    n: int
    theta: float
    alpha: float
    beta: float
    N: int

    @property
    def N_over_n(self):
        return self.N / self.n

    @property
    def N_over_nlogn(self):
        return self.N / (self.n * math.log(self.n))


@dataclass
class CountScalingReport:
    rows: list

    def slope(self):
        n = np.array([r.n for r in self.rows], dtype=float)
        N = np.array([r.N for r in self.rows], dtype=float)
        return float(np.polyfit(n, N, 1)[0])

    def nlogn_ratio(self):
        vals = [r.N_over_nlogn for r in self.rows]
        return max(vals) / min(vals) if min(vals) > 0 else float("inf")


class _ScalingItem:
    def __init__(self, potential, alpha, beta, h, width_fraction):
        self.potential, self.alpha, self.beta = potential, alpha, beta
        self.h, self.width_fraction = h, width_fraction

    def __call__(self, n):
        op = assemble(self.potential, GridSpec.box(n, self.h))
        return len(interface_pairs(op, self.alpha, self.beta, n, self.width_fraction * n))


def count_scaling(V, gap, spec, alpha, beta, n_list, h=None, mapper=map, width_fraction=0.25):
    """Interface-localized eigenvalue counts N in [alpha, beta) over box sizes.

    ``spec`` is a rotation angle or a GrainPotential (e.g. a two-sided
    control without interface).  An eigenpair counts when more than half
    of its mass lies in |x| < width_fraction * n.
    """
    n_list = list(n_list)
    if len(n_list) < 3 or any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be increasing with at least 3 values")
    if not alpha < beta:
        raise ValueError("need alpha < beta")
    h = gap.h if h is None else h
    if isinstance(spec, GrainPotential):
        pot, theta = spec, float(spec.parameter) if spec.kind == "rotation" else 0.0
    else:
        theta = float(_angle(spec).theta)
        pot = GrainPotential.rotation(V, theta)
    counts = list(mapper(_ScalingItem(pot, alpha, beta, h, width_fraction), n_list))
    rows = [ScalingRow(int(n), theta, float(alpha), float(beta), int(N))
            for n, N in zip(n_list, counts)]
    return CountScalingReport(rows)
