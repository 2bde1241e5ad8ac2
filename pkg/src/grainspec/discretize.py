"""Finite-difference assembly of -Laplace + V on boxes, strips and cells.

Nodes sit at cell midpoints, ``x_i = x0 + (i + 1/2) h``.  Dirichlet sides
drop the neighbour outside the domain (5-point stencil with a zero
exterior value), periodic sides wrap, and Bloch sides wrap with a phase.

The potential is averaged over each node's x-cell with Gauss-Legendre
quadrature, splitting the cell at the interface x = 0, and sampled at the
node in y.  Plain point sampling is available with ``quad=1``.  Averaging
keeps the discrete operator continuous in the dislocation shift and puts
the interface at the true line x = 0 on every mesh.
"""
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .eigensolve.operator import SparseSymmetricOperator

__all__ = [
    "GridError", "GridSpec", "StretchedCellSpec", "SparseSymmetricOperator", "assemble",
    "assemble_stretched", "bloch_fiber", "cell_average", "dump_coordinate",
    "insert_dirichlet_line", "node_coordinates",
]

_TOL = 1e-9


class GridError(ValueError):
    """Invalid mesh or boundary specification."""


def mesh_inverse(h):
    """Return the integer 1/h or raise when the mesh is not commensurate."""
    if not (isinstance(h, (int, float)) and h > 0 and math.isfinite(h)):
        raise GridError(f"mesh width must be a positive number, got {h!r}")
    inv = 1.0 / h
    k = round(inv)
    if k < 1 or abs(inv - k) > _TOL * max(inv, 1.0):
        raise GridError(f"mesh rule violated: 1/h must be a positive integer (h={h!r})")
    return k


def _count(length, h, what):
    k = length / h
    if k < 1 - _TOL or abs(k - round(k)) > _TOL * max(k, 1.0):
        raise GridError(f"{what} length {length!r} is not a positive multiple of h={h!r}")
    return int(round(k))


def _check_bc(bc):
    if bc in ("dirichlet", "periodic"):
        return bc
    if isinstance(bc, tuple) and len(bc) == 2 and bc[0] == "bloch":
        k = float(bc[1])
        if not 0 <= k < 2 * math.pi:
            raise GridError(f"Bloch phase must lie in [0, 2 pi), got {k!r}")
        return ("bloch", k)
    raise GridError(f"unknown boundary condition {bc!r}")


@dataclass(frozen=True)
class GridSpec:
    """Rectangular node grid with per-axis boundary conditions."""

    h: float
    xlim: tuple
    ylim: tuple
    bc_x: object = "dirichlet"
    bc_y: object = "dirichlet"
    domain: str = "box"

    def __post_init__(self):
        mesh_inverse(self.h)
        object.__setattr__(self, "bc_x", _check_bc(self.bc_x))
        object.__setattr__(self, "bc_y", _check_bc(self.bc_y))
        bloch = isinstance(self.bc_x, tuple) or isinstance(self.bc_y, tuple)
        if bloch and self.domain != "cell":
            raise GridError("Bloch boundary conditions are only allowed on cell domains")
        _count(self.xlim[1] - self.xlim[0], self.h, "x side")
        _count(self.ylim[1] - self.ylim[0], self.h, "y side")

    @classmethod
    def box(cls, n, h, center=(0.0, 0.0)):
        """Dirichlet square (cx - n, cx + n) x (cy - n, cy + n)."""
        cx, cy = center
        return cls(h, (cx - n, cx + n), (cy - n, cy + n), "dirichlet", "dirichlet", "box")

    @classmethod
    def rect(cls, xlim, ylim, h):
        return cls(h, tuple(xlim), tuple(ylim), "dirichlet", "dirichlet", "box")

    @classmethod
    def strip(cls, n, h, bc_x="periodic"):
        """(-n, n) x (0, 1), periodic in y."""
        return cls(h, (-n, n), (0.0, 1.0), bc_x, "periodic", "strip")

    @classmethod
    def cell(cls, h, px=1, py=1, k=None):
        if k is None:
            bx = by = "periodic"
        else:
            bx, by = ("bloch", float(k[0])), ("bloch", float(k[1]))
        return cls(h, (0.0, float(px)), (0.0, float(py)), bx, by, "cell")

    @property
    def nx(self):
        return _count(self.xlim[1] - self.xlim[0], self.h, "x side")

    @property
    def ny(self):
        return _count(self.ylim[1] - self.ylim[0], self.h, "y side")

    def nodes(self):
        x = self.xlim[0] + (np.arange(self.nx) + 0.5) * self.h
        y = self.ylim[0] + (np.arange(self.ny) + 0.5) * self.h
        return x, y


@dataclass(frozen=True)
class StretchedCellSpec:
    """Doubly periodic cell (-n - t, n) x (0, 1) with 2n/h x-nodes for every t."""

    t: float
    n: int
    h: float

    def __post_init__(self):
        if not 0 <= self.t <= 1:
            raise GridError(f"stretch t must lie in [0, 1], got {self.t!r}")
        mesh_inverse(self.h)
        if int(self.n) != self.n or self.n < 1:
            raise GridError("strip half-length n must be a positive integer")

    @property
    def nx(self):
        return _count(2 * self.n, self.h, "strip")

    @property
    def hx(self):
        return (2 * self.n + self.t) / self.nx

    def nodes(self):
        x = -self.n - self.t + (np.arange(self.nx) + 0.5) * self.hx
        y = (np.arange(mesh_inverse(self.h)) + 0.5) * self.h
        return x, y


_GAUSS = {q: np.polynomial.legendre.leggauss(q) for q in (1, 2, 3, 4, 5, 6)}


def cell_average(potential, x, hx, y, quad=4):
    """Potential averaged over [x - hx/2, x + hx/2] (split at 0), at heights y.

    Returns an array of shape (len(x), len(y)).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if quad == 1:
        return np.asarray(potential(x[:, None], y[None, :]), dtype=float)
    g, w = _GAUSS[quad]
    lo, hi = x - hx / 2, x + hx / 2
    straddle = (lo < 0) & (hi > 0)
    out = np.zeros((x.size, y.size))
    for a, b, sel in ((lo, np.where(straddle, 0.0, hi), slice(None)),
                      (np.zeros_like(lo), hi, straddle)):
        a, b = a[sel], b[sel]
        if a.size == 0:
            continue
        mid, half = (a + b) / 2, (b - a) / 2
        xq = mid[:, None] + half[:, None] * g[None, :]
        vals = np.asarray(potential(xq[:, :, None], y[None, None, :]), dtype=float)
        contrib = np.einsum("q,iqj->ij", w, vals) * (half / hx)[:, None]
        if isinstance(sel, slice):
            out += contrib
        else:
            out[sel] += contrib
    return out


def _laplacian(nx, ny, hx, hy, bc_x, bc_y, keep=None):
    """Sparse 5-point operator on an nx-by-ny node grid, index = i * ny + j."""
    idx = np.arange(nx * ny).reshape(nx, ny)
    rows, cols, vals = [], [], []
    diag = np.full(nx * ny, 2 / hx**2 + 2 / hy**2, dtype=complex)

    def links(axis, n, hstep, bc):
        if n < 2 and bc == "dirichlet":
            return
        a = idx if axis == 0 else idx.T
        src, dst = a[:-1].ravel(), a[1:].ravel()
        rows.append(src)
        cols.append(dst)
        vals.append(np.full(src.size, -1 / hstep**2, dtype=complex))
        if bc != "dirichlet":
            phase = 1.0 if bc == "periodic" else np.exp(1j * bc[1])
            # psi(node n) = phase * psi(node 0): last row couples to first
            src, dst = a[-1].ravel(), a[0].ravel()
            rows.append(src)
            cols.append(dst)
            vals.append(np.full(src.size, -phase / hstep**2, dtype=complex))

    links(0, nx, hx, bc_x)
    links(1, ny, hy, bc_y)
    r = np.concatenate(rows) if rows else np.empty(0, int)
    c = np.concatenate(cols) if cols else np.empty(0, int)
    v = np.concatenate(vals) if vals else np.empty(0, complex)
    if keep is not None:
        ok = keep[r] & keep[c]
        r, c, v = r[ok], c[ok], v[ok]
    # Hermitian completion: A[c, r] = conj(A[r, c])
    R = np.concatenate([r, c, np.arange(nx * ny)])
    C = np.concatenate([c, r, np.arange(nx * ny)])
    V = np.concatenate([v, np.conj(v), diag])
    mat = sp.coo_matrix((V, (R, C)), shape=(nx * ny, nx * ny)).tocsr()
    mat.sum_duplicates()
    return mat


def _finish(mat, values, x, y, keep, meta, force_complex=False):
    nx, ny = x.size, y.size
    mat = mat + sp.diags(values.ravel().astype(complex))
    if not force_complex:
        mat = sp.csr_matrix(mat.real)
    X = np.repeat(x, ny)
    Y = np.tile(y, nx)
    if keep is not None:
        sel = np.flatnonzero(keep)
        mat = mat[sel][:, sel]
        X, Y = X[sel], Y[sel]
        meta = dict(meta, kept=sel)
    return SparseSymmetricOperator(sp.csr_matrix(mat), X, Y, (nx, ny), meta)


class NodeValues:
    """Potential given by its values on the nodes of ``grid`` (use with quad=1)."""

    def __init__(self, grid, values):
        self.x0, self.y0, self.h = grid.xlim[0], grid.ylim[0], grid.h
        self.values = np.asarray(values, dtype=float).reshape(grid.nx, grid.ny)

    def __call__(self, x, y):
        i = np.rint((np.asarray(x) - self.x0) / self.h - 0.5).astype(int)
        j = np.rint((np.asarray(y) - self.y0) / self.h - 0.5).astype(int)
        return self.values[i, j]


def assemble(potential, grid, quad=4, mask=None):
    """Discretize -Laplace + potential on ``grid``.

    ``mask`` (shape (nx, ny), optional) keeps only the selected nodes;
    removed nodes act as Dirichlet zeros for their neighbours.
    """
    x, y = grid.nodes()
    nx, ny = x.size, y.size
    keep = None if mask is None else np.asarray(mask, dtype=bool).reshape(nx * ny)
    lap = _laplacian(nx, ny, grid.h, grid.h, grid.bc_x, grid.bc_y, keep)
    values = cell_average(potential, x, grid.h, y, quad)
    bloch = isinstance(grid.bc_x, tuple) or isinstance(grid.bc_y, tuple)
    meta = {"h": grid.h, "hx": grid.h, "domain": grid.domain, "xlim": grid.xlim,
            "ylim": grid.ylim}
    return _finish(lap, values, x, y, keep, meta, force_complex=bloch)


def assemble_stretched(potential, spec):
    """Dislocation operator on the stretched periodic cell (-n - t, n) x (0, 1)."""
    from .potentials import GrainPotential, PeriodicPotential

    if isinstance(potential, PeriodicPotential):
        potential = GrainPotential.dislocation(potential, spec.t)
    elif potential.kind != "dislocation":
        raise GridError("assemble_stretched needs a dislocation potential")
    elif abs(potential.parameter - spec.t) > 1e-15:
        raise GridError("dislocation shift and stretch parameter differ")
    x, y = spec.nodes()
    lap = _laplacian(x.size, y.size, spec.hx, spec.h, "periodic", "periodic")
    values = cell_average(potential, x, spec.hx, y)
    meta = {"h": spec.h, "hx": spec.hx, "domain": "stretched", "t": spec.t, "n": spec.n,
            "xlim": (-spec.n - spec.t, spec.n), "ylim": (0.0, 1.0)}
    return _finish(lap, values, x, y, None, meta)


def bloch_fiber(potential, k, h):
    """Unit-cell operator with quasimomentum phases exp(i k) on wrap links."""
    kx, ky = (float(v) for v in k)
    return assemble(potential, GridSpec.cell(h, k=(kx, ky)))


def node_coordinates(op):
    return op.x, op.y


def insert_dirichlet_line(op, xi):
    """Impose u = 0 on the vertical line x = xi (ghost-point treatment).

    Each horizontal link crossing the line loses its coupling and each
    endpoint gains ``1 / (s h^2)``, where ``s h`` is its distance to the
    line.  The quadratic form can only grow, so no eigenvalue decreases.
    """
    mat = op.matrix.tocoo()
    hx = op.meta.get("hx", op.meta.get("h"))
    x, y = op.x, op.y
    r, c = mat.row, mat.col
    cross = ((r != c) & (np.abs(y[r] - y[c]) < 1e-12 * hx)
             & (np.abs(x[r] - x[c]) < 1.5 * hx) & (x[r] < xi) & (x[c] > xi))
    if np.any(np.isclose(x, xi, rtol=0, atol=1e-12 * hx)):
        raise GridError("Dirichlet line passes through grid nodes")
    extra = np.zeros(op.dimension)
    np.add.at(extra, r[cross], 1 / ((xi - x[r[cross]]) * hx))
    np.add.at(extra, c[cross], 1 / ((x[c[cross]] - xi) * hx))
    drop = cross.copy()
    # drop both orientations of every crossing link
    pairs = set(zip(r[cross].tolist(), c[cross].tolist()))
    drop |= np.array([(ci, ri) in pairs for ri, ci in zip(r, c)], dtype=bool)
    new = sp.coo_matrix((mat.data[~drop], (r[~drop], c[~drop])), shape=mat.shape).tocsr()
    new = new + sp.diags(extra)
    return SparseSymmetricOperator(new, x, y, op.shape, dict(op.meta))


def dump_coordinate(op, path):
    """Write ``row col value`` lines (17 significant digits), 0-based indices."""
    coo = op.matrix.tocoo()
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w", encoding="utf-8") as fh:
        for k in order:
            v = coo.data[k]
            if np.iscomplexobj(coo.data):
                fh.write(f"{coo.row[k]} {coo.col[k]} {v.real:.17g} {v.imag:.17g}\n")
            else:
                fh.write(f"{coo.row[k]} {coo.col[k]} {v:.17g}\n")
