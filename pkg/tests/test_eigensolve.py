import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, strategies as st

from grainspec.eigensolve import (AVAILABLE_BACKENDS, BACKEND, Factorization, as_operator,
                                  count_below, count_interval, eigenpairs_near)


def _tridiagonal_3():
    return 16 * (2 * np.eye(3) - np.eye(3, k=1) - np.eye(3, k=-1))


def _random_symmetric(rng, n, complex_=False, band=None):
    a = rng.standard_normal((n, n))
    if complex_:
        a = a + 1j * rng.standard_normal((n, n))
    if band is not None:
        a = np.triu(np.tril(a, band), -band)
    return 0.5 * (a + a.conj().T)


def test_backend_selection():
    assert BACKEND in AVAILABLE_BACKENDS
    assert "python" in AVAILABLE_BACKENDS


@pytest.mark.parametrize("backend", AVAILABLE_BACKENDS)
@pytest.mark.parametrize("complex_", [False, True])
def test_inertia_matches_dense(backend, complex_):
    rng = np.random.default_rng(7)
    for trial in range(40):
        n = int(rng.integers(1, 50))
        a = _random_symmetric(rng, n, complex_, band=None if trial % 2 else 4)
        exact = np.linalg.eigvalsh(a)
        sigma = float(rng.uniform(-3, 3))
        assert count_below(as_operator(a), sigma, backend).negatives == np.sum(exact < sigma)


def test_three_by_three_example():
    op = as_operator(_tridiagonal_3())
    assert count_below(op, 40.0).negatives == 2
    assert count_interval(op, 0.0, 40.0) == 2
    pair = eigenpairs_near(op, 30.0, 1)[0]
    assert pair.value == pytest.approx(32.0, abs=1e-10)


def test_gershgorin_extremes():
    rng = np.random.default_rng(5)
    a = _random_symmetric(rng, 25, band=3)
    radius = np.abs(a).sum(axis=1) - np.abs(np.diag(a))
    lo, hi = np.min(np.diag(a) - radius), np.max(np.diag(a) + radius)
    op = as_operator(a)
    assert count_below(op, lo - 1e-3).negatives == 0
    assert count_interval(op, lo - 1e-3, hi + 1e-3) == 25


def test_count_monotone_in_shift():
    rng = np.random.default_rng(9)
    op = as_operator(_random_symmetric(rng, 45, band=4))
    counts = [count_below(op, s).negatives for s in np.linspace(-6, 6, 100)]
    assert np.all(np.diff(counts) >= 0)


def test_count_interval_rejects_empty_interval():
    op = as_operator(np.eye(3))
    with pytest.raises(ValueError):
        count_interval(op, 1.0, 1.0)


def test_singular_shift_is_perturbed():
    op = as_operator(np.diag([1.0, 2.0, 3.0]))
    fac = Factorization(op, 2.0)
    assert fac.inertia.factorization_status == "pivot-perturbed"
    # the perturbation is far below the eigenvalue spacing
    assert count_below(op, 2.0 + 1e-6).negatives == 2


@pytest.mark.parametrize("backend", AVAILABLE_BACKENDS)
def test_solve_accuracy(backend):
    rng = np.random.default_rng(3)
    a = _random_symmetric(rng, 40, band=5) + 0.1 * np.eye(40)
    b = rng.standard_normal((40, 3))
    x = Factorization(as_operator(a), 0.0, backend).solve(b)
    assert np.allclose(a @ x, b, atol=1e-9)


def test_backends_agree_on_grid_operator():
    if len(AVAILABLE_BACKENDS) < 2:
        pytest.skip("compiled backend not built")
    n = 30
    t = sp.diags([-1, 2, -1], [-1, 0, 1], shape=(n, n))
    a = sp.kron(t, sp.eye(n)) + sp.kron(sp.eye(n), t)
    op = as_operator(a)
    counts = {b: count_below(op, 1.3, b).negatives for b in AVAILABLE_BACKENDS}
    assert len(set(counts.values())) == 1


def test_eigenpairs_near_matches_dense():
    rng = np.random.default_rng(11)
    a = _random_symmetric(rng, 80, band=6)
    exact = np.linalg.eigvalsh(a)
    sigma = 0.3
    pairs = eigenpairs_near(as_operator(a), sigma, 6)
    want = exact[np.argsort(np.abs(exact - sigma))[:6]]
    assert np.allclose(sorted(p.value for p in pairs), np.sort(want), atol=1e-9)
    for p in pairs:
        assert np.linalg.norm(a @ p.vector - p.value * p.vector) < 1e-7
        assert np.linalg.norm(p.vector) == pytest.approx(1.0)


def test_eigenpair_residuals_and_orthogonality():
    rng = np.random.default_rng(21)
    a = _random_symmetric(rng, 60, band=5)
    op = as_operator(a)
    pairs = eigenpairs_near(op, -0.5, 8)
    norm1 = np.abs(a).sum(axis=0).max()
    vecs = np.column_stack([p.vector for p in pairs])
    for p in pairs:
        assert p.residual <= 1e-8 * norm1
        assert np.linalg.norm(a @ p.vector - p.value * p.vector) <= 1e-8 * norm1
    assert np.allclose(vecs.T @ vecs, np.eye(8), atol=1e-8)
    dist = [abs(p.value + 0.5) for p in pairs]
    assert dist == sorted(dist)


def test_eigenpairs_near_degenerate_cluster():
    # four-fold eigenvalue: all copies must be returned
    op = as_operator(np.diag([1.0, 2.0, 2.0, 2.0, 2.0, 5.0, 7.0]))
    vals = sorted(p.value for p in eigenpairs_near(op, 2.1, 4))
    assert np.allclose(vals, 2.0)


@given(st.integers(1, 30), st.integers(0, 10**6), st.floats(-3, 3))
def test_inertia_property(n, seed, sigma):
    rng = np.random.default_rng(seed)
    a = _random_symmetric(rng, n, band=3)
    got = count_below(as_operator(a), sigma).negatives
    assert got == np.sum(np.linalg.eigvalsh(a) < sigma)


def test_benchmark_script_runs(capsys):
    import importlib.util
    import pathlib

    path = pathlib.Path(__file__).resolve().parents[1] / "benchmarks" / "bench_ldlt.py"
    spec = importlib.util.spec_from_file_location("bench_ldlt", path)
    bench = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(bench)
    bench.main(["--sizes", "1", "--repeat", "1"])
    assert "python" in capsys.readouterr().out


def test_environment_forces_python_fallback():
    import os
    import subprocess
    import sys

    env = dict(os.environ, GRAINSPEC_BACKEND="python")
    out = subprocess.run([sys.executable, "-c",
                          "import grainspec.eigensolve as e; print(e.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
