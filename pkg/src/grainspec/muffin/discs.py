"""Dirichlet eigenvalues of discs truncated by a vertical line.

The cut disc C(r, xi) is {x^2 + y^2 < r^2, x < xi} in coordinates centred
at the disc centre.  It is discretized on the vertex lattice (i h, j h).
A link from an interior node to a node outside the domain is closed with
the symmetric ghost-point rule: if the boundary sits a fraction s of the
link away, the link contributes 1 / (s h^2) to the diagonal instead of
the usual -1/h^2 coupling.  This keeps the matrix symmetric and gives
second-order eigenvalues, where deleting outside nodes (staircase) is
only first order.
"""
import math

import numpy as np
import scipy.sparse as sp

from ..eigensolve import SparseSymmetricOperator, count_interval, eigenpairs_near

MIN_FRACTION = 1e-3


class CutDiscError(ValueError):
    """Bad cut-disc parameters or too few interior nodes."""


def cut_disc_operator(r, xi, h):
    """Ghost-point Dirichlet Laplacian on C(r, xi)."""
    if not -r < xi <= r:
        raise CutDiscError("cut parameter xi must lie in (-r, r]")
    m = int(math.ceil(r / h)) + 1
    ticks = h * np.arange(-m, m + 1)
    X, Y = np.meshgrid(ticks, ticks, indexing="ij")
    inside = (X**2 + Y**2 < r * r) & (X < xi)
    index = -np.ones(X.shape, dtype=np.int64)
    index[inside] = np.arange(int(inside.sum()))
    n = int(inside.sum())
    xs, ys = X[inside], Y[inside]
    diag = np.zeros(n)
    rows, cols = [], []
    inv_h2 = 1.0 / (h * h)
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        nb = np.roll(np.roll(index, -di, axis=0), -dj, axis=1)[inside]
        ok = nb >= 0
        rows.append(index[inside][ok])
        cols.append(nb[ok])
        # distance to the boundary along the link for outside neighbours
        px, py = xs[~ok], ys[~ok]
        if di:
            chord = np.sqrt(np.maximum(r * r - py**2, 0.0))
            dist = (np.minimum(chord, xi) - px) if di > 0 else (px + chord)
        else:
            chord = np.sqrt(np.maximum(r * r - px**2, 0.0))
            dist = chord - dj * py
        frac = np.clip(dist / h, MIN_FRACTION, 1.0)
        np.add.at(diag, np.flatnonzero(ok), inv_h2)
        np.add.at(diag, np.flatnonzero(~ok), inv_h2 / frac)
    rows, cols = np.concatenate(rows), np.concatenate(cols)
    off = sp.csr_matrix((np.full(rows.size, -inv_h2), (rows, cols)), shape=(n, n))
    mat = off + sp.diags(diag)
    return SparseSymmetricOperator(mat, xs, ys, meta={"r": r, "xi": xi, "h": h})


def _default_h(r, h):
    h = r / 64 if h is None else float(h)
    if h > r / 32 * (1 + 1e-12):
        raise CutDiscError("mesh must satisfy h <= r/32")
    return h


def cut_disc_eigenvalues(r, xi, k, h=None):
    """Lowest k Dirichlet eigenvalues of C(r, xi); xi = r is the full disc."""
    h = _default_h(r, h)
    op = cut_disc_operator(r, xi, h)
    if op.dimension < k:
        raise CutDiscError(f"cut disc has {op.dimension} interior nodes, fewer than k={k}")
    pairs = eigenpairs_near(op, 0.0, k)
    return np.sort([p.value for p in pairs])


def cut_disc_window(r, xi, a, b, h=None):
    """Eigenvalues of C(r, xi) inside (a, b), empty when the domain is too thin.

    The cut disc fits in a strip of width r + xi, so its ground energy is at
    least pi^2 / (r + xi)^2; with a 20% allowance for the mesh this skips
    caps that cannot reach the window.
    """
    h = _default_h(r, h)
    if 0.8 * math.pi**2 / (r + xi) ** 2 >= b:
        return np.empty(0)
    op = cut_disc_operator(r, xi, h)
    if op.dimension == 0:
        return np.empty(0)
    k = count_interval(op, a, b)
    if k == 0:
        return np.empty(0)
    vals = [p.value for p in eigenpairs_near(op, 0.5 * (a + b), k)]
    return np.sort([v for v in vals if a < v < b])
