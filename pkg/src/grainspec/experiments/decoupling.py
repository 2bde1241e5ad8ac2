"""Decoupling of high barriers along Dirichlet lines.

For a barrier region U of height n and a line set S inside U, the
resolvent of -Laplace + n 1_U approaches that of the same operator with
Dirichlet conditions on S as n grows.  On the grid, S is a node set and
the Dirichlet version simply deletes those nodes.
"""
import numpy as np

from ..discretize import NodeValues, assemble
from ..eigensolve import Factorization

POWER_STEPS = 50
POWER_RTOL = 1e-6


class DecouplingError(ValueError):
    """The line set is not well inside the barrier region."""


def _neighbours(mask):
    out = np.zeros_like(mask)
    out[1:] |= mask[:-1]
    out[:-1] |= mask[1:]
    out[:, 1:] |= mask[:, :-1]
    out[:, :-1] |= mask[:, 1:]
    return out


def check_masks(U, S):
    """S must lie in U and every grid neighbour of S must also lie in U."""
    U = np.asarray(U, dtype=bool)
    S = np.asarray(S, dtype=bool)
    if U.shape != S.shape:
        raise DecouplingError("masks must have the same shape")
    if np.any(S & ~U):
        raise DecouplingError("line set S is not contained in the barrier region U")
    if np.any(_neighbours(S) & ~U):
        raise DecouplingError("line set S touches the boundary of U (distance 0 on the grid)")


def _spectral_norm(apply, n, steps=POWER_STEPS, rtol=POWER_RTOL):
    v = np.ones(n) + 0.5 * np.cos(np.arange(n))
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(steps):
        w = apply(v)
        new = float(np.linalg.norm(w))
        if new == 0.0:
            return 0.0
        v = w / new
        if abs(new - est) <= rtol * new:
            return new
        est = new
    return est


def decoupling_norm(grid, U, S, height):
    """|| (H_n + 1)^-1 - P (H_{n,S} + 1)^-1 P^T || by power iteration."""
    U = np.asarray(U, dtype=bool)
    S = np.asarray(S, dtype=bool)
    if not S.any():
        return 0.0
    barrier = NodeValues(grid, height * U)
    full = assemble(barrier, grid, quad=1)
    cut = assemble(barrier, grid, quad=1, mask=~S)
    f_full = Factorization(full, -1.0)
    f_cut = Factorization(cut, -1.0)
    kept = cut.meta["kept"]
    n = full.dimension

    def apply(v):
        w = f_full.solve(v)
        z = np.zeros(n)
        z[kept] = f_cut.solve(v[kept])
        return w - z

    return _spectral_norm(apply, n)


def decoupling_check(grid, U, S, heights, mapper=map):
    """List of (height, norm) for the resolvent difference at shift -1."""
    check_masks(U, S)
    heights = [float(v) for v in heights]
    if any(b <= a for a, b in zip(heights, heights[1:])):
        raise ValueError("heights must be increasing")
    norms = list(mapper(_NormItem(grid, U, S), heights))
    return list(zip(heights, norms))


class _NormItem:
    def __init__(self, grid, U, S):
        self.grid, self.U, self.S = grid, U, S

    def __call__(self, height):
        return decoupling_norm(self.grid, self.U, self.S, height)


def barrier_grid_masks(grid, r, theta=0.0):
    """Barrier U (outside the discs) and line set S of the muffin-tin geometry.

    Discs of radius r sit at the cell centres, unrotated on x >= 0 and
    rotated by theta on x < 0.  S holds the nodes within h/2 of the lattice
    lines that lie in U together with all their grid neighbours.
    """
    from ..muffin.geometry import disc_mask, grid_line_mask

    x, y = grid.nodes()
    X, Y = np.meshgrid(x, y, indexing="ij")
    U = ~disc_mask(X, Y, r, theta)
    S = grid_line_mask(X, Y, grid.h, theta) & U & ~_neighbours(~U)
    return U, S
