import math

import numpy as np
import pytest
import scipy.sparse as sp

from grainspec.discretize import (GridError, GridSpec, NodeValues, StretchedCellSpec, assemble,
                                  assemble_stretched, bloch_fiber, dump_coordinate,
                                  insert_dirichlet_line, mesh_inverse)
from grainspec.eigensolve import count_below, eigenpairs_near
from grainspec.potentials import GrainPotential, PeriodicPotential

V = PeriodicPotential.cosine(30)
FLAT = PeriodicPotential.flat()


def _eigs(op):
    return np.linalg.eigvalsh(op.to_dense())


def _eigs_lowest(op):
    return eigenpairs_near(op, 0.0, 1)[0].value


def test_mesh_rule():
    assert mesh_inverse(0.125) == 8
    for bad in (0.3, 0.0, -0.25, float("nan")):
        with pytest.raises(GridError, match="h"):
            mesh_inverse(bad)
    with pytest.raises(GridError):
        GridSpec.box(1.1, 0.25)


def test_bloch_only_on_cells():
    with pytest.raises(GridError):
        GridSpec(0.25, (0, 1), (0, 1), ("bloch", 1.0), "periodic", "box")


def test_one_dimensional_section():
    # one periodic row in y removes the y stiffness entirely
    grid = GridSpec(0.25, (0.0, 0.75), (0.0, 0.25), "dirichlet", "periodic", "strip")
    dense = assemble(FLAT, grid).to_dense()
    want = 16 * (2 * np.eye(3) - np.eye(3, k=1) - np.eye(3, k=-1))
    assert np.array_equal(dense, want)
    assert np.allclose(np.linalg.eigvalsh(dense),
                       [16 * (2 - math.sqrt(2)), 32, 16 * (2 + math.sqrt(2))])


def test_flat_cell_kernel():
    op = assemble(FLAT, GridSpec.cell(1 / 8))
    w, v = np.linalg.eigh(op.to_dense())
    assert abs(w[0]) < 1e-10
    assert np.allclose(np.abs(v[:, 0]), 1 / 8)


def test_zero_rotation_matches_bare_potential():
    grid = GridSpec.box(2, 1 / 8)
    a = assemble(GrainPotential.rotation(V, 0.0), grid).matrix
    b = assemble(V, grid).matrix
    assert abs(a - b).max() <= 1e-14 * abs(b).max()


@pytest.mark.parametrize("pot", [V, GrainPotential.rotation(V, 0.3),
                                 GrainPotential.dislocation(V, 0.4)])
def test_exactly_symmetric(pot):
    m = assemble(pot, GridSpec.box(2, 1 / 8)).matrix
    assert abs(m - m.T).max() == 0


def test_bloch_is_hermitian_and_conjugation_symmetric():
    k = (0.7, 2.1)
    a = bloch_fiber(V, k, 1 / 8).to_dense()
    assert np.array_equal(a, a.conj().T)
    b = bloch_fiber(V, (2 * math.pi - k[0], 2 * math.pi - k[1]), 1 / 8).to_dense()
    assert np.allclose(np.linalg.eigvalsh(a), np.linalg.eigvalsh(b), atol=1e-9)


@pytest.mark.parametrize("k", [(0.0, 0.0), (math.pi, math.pi), (1.0, 2.5)])
def test_flat_bloch_dispersion(k):
    h = 1 / 8
    lowest = _eigs(bloch_fiber(FLAT, k, h))[0]
    # plane waves exp(i (k + 2 pi j) x) on the cell, minimised over the shift j
    shifted = [abs(kk - 2 * math.pi * round(kk / (2 * math.pi))) for kk in k]
    want = 4 / h**2 * sum(math.sin(q * h / 2) ** 2 for q in shifted)
    assert lowest == pytest.approx(want, abs=1e-9)


def test_stretched_t0_matches_periodic_box():
    a = assemble_stretched(V, StretchedCellSpec(0.0, 2, 1 / 8)).matrix
    grid = GridSpec(1 / 8, (-2.0, 2.0), (0.0, 1.0), "periodic", "periodic", "strip")
    b = assemble(V, grid).matrix
    assert abs(a - b).max() <= 1e-12 * abs(b).max()


def test_full_stretch_adds_band_count(gap30):
    a = gap30.a
    n0 = count_below(assemble_stretched(V, StretchedCellSpec(0.0, 2, 1 / 8)), a).negatives
    n1 = count_below(assemble_stretched(V, StretchedCellSpec(1.0, 2, 1 / 8)), a).negatives
    assert n0 == 2 * 2 * gap30.band_index
    assert n1 - n0 == gap30.band_index


def test_stretched_rejects_mismatched_shift():
    with pytest.raises(GridError):
        assemble_stretched(GrainPotential.dislocation(V, 0.3), StretchedCellSpec(0.5, 2, 1 / 8))
    with pytest.raises(GridError):
        StretchedCellSpec(1.5, 2, 1 / 8)


def test_dirichlet_box_ground_state():
    n, h = 1, 1 / 64
    lam = _eigs_lowest(assemble(FLAT, GridSpec.box(n, h)))
    continuum = 2 * math.pi**2 / (2 * n) ** 2
    assert abs(lam - continuum) / continuum < 0.02


@pytest.mark.parametrize("xi", [0.06, -0.3, 0.51])
def test_dirichlet_line_never_lowers_eigenvalues(xi):
    op = assemble(V, GridSpec.box(1, 1 / 8))
    cut = insert_dirichlet_line(op, xi)
    before, after = _eigs(op), _eigs(cut)
    assert np.all(after >= before - 1e-9)
    assert np.array_equal(cut.to_dense(), cut.to_dense().T)


def test_dirichlet_line_through_node_is_rejected():
    op = assemble(V, GridSpec.box(1, 1 / 8))
    with pytest.raises(GridError):
        insert_dirichlet_line(op, 1 / 16)


def test_mask_removes_nodes():
    grid = GridSpec.box(1, 1 / 4)
    mask = np.ones((grid.nx, grid.ny), bool)
    mask[0, :] = False
    op = assemble(V, grid, mask=mask)
    assert op.dimension == mask.sum()
    assert np.array_equal(op.meta["kept"], np.flatnonzero(mask.ravel()))


def test_node_values_lookup():
    grid = GridSpec.box(1, 1 / 4)
    vals = np.arange(grid.nx * grid.ny, dtype=float)
    op = assemble(NodeValues(grid, vals), grid, quad=1)
    lap = assemble(FLAT, grid)
    assert np.allclose((op.matrix - lap.matrix).diagonal(), vals)


def test_mesh_refinement_order():
    vals = [np.sort(_eigs(bloch_fiber(V, (0.4, 1.1), h)))[2] for h in (1 / 8, 1 / 16, 1 / 32)]
    d1, d2 = abs(vals[0] - vals[1]), abs(vals[1] - vals[2])
    assert math.log2(d1 / d2) >= 1.8


def test_dump_coordinate(tmp_path):
    op = assemble(V, GridSpec.box(0.5, 1 / 4))
    path = tmp_path / "m.txt"
    dump_coordinate(op, path)
    rows = np.loadtxt(path)
    back = sp.coo_matrix((rows[:, 2], (rows[:, 0].astype(int), rows[:, 1].astype(int))),
                         shape=op.matrix.shape)
    assert abs(back - op.matrix).max() == 0
