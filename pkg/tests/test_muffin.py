import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from scipy import special

from grainspec.eigensolve import count_interval
from grainspec.muffin import (CutDiscError, bessel_zeros, besselj, brute_force_cut_discs,
                              cut_disc_eigenvalues, cut_disc_window, disc_eigenvalues,
                              disc_spectrum, enumerate_cut_discs, finite_height_convergence,
                              muffin_surface_spectrum, rational_tangent, y_period)
from grainspec.muffin.spectrum import finite_height_operator, muffin_grid
from grainspec.potentials import RotationAngle

R = 0.25
TAN_HALF = RotationAngle.from_tan(0.5)


@pytest.mark.parametrize("nu", [0, 1, 2, 5, 10])
def test_besselj_matches_scipy(nu):
    x = np.linspace(0.0, 40.0, 801)
    got = np.array([besselj(nu, v) for v in x])
    assert np.allclose(got, special.jv(nu, x), rtol=0, atol=1e-12)


@pytest.mark.parametrize("nu", [0, 1, 3, 7])
def test_bessel_zeros_match_scipy(nu):
    zs = bessel_zeros(nu, 30.0)
    want = special.jn_zeros(nu, len(zs))
    assert want[-1] < 30.0 and np.allclose(zs, want, rtol=0, atol=1e-10)
    assert special.jn_zeros(nu, len(zs) + 1)[-1] > 30.0


def test_first_disc_eigenvalue():
    mpmath.mp.dps = 30
    j01 = float(mpmath.besseljzero(0, 1))
    assert disc_eigenvalues(1.0, 1)[0] == pytest.approx(j01**2, abs=1e-10)


def test_disc_scaling_and_order():
    ref = disc_eigenvalues(1.0, 8)
    for r in (0.1, 0.25, 0.37, 2.0):
        mu = disc_eigenvalues(r, 8)
        assert np.allclose(mu * r * r, ref, rtol=1e-10, atol=0)
        assert np.all(np.diff(mu) > 0)


def test_disc_multiplicities():
    values, mult = disc_spectrum(1.0, 4)
    assert list(mult) == [1, 2, 2, 1]
    assert values[1] == pytest.approx(special.jn_zeros(1, 1)[0] ** 2)


def test_disc_spectrum_rejects_bad_input():
    with pytest.raises(ValueError):
        disc_spectrum(0.0, 2)


def test_full_disc_limit():
    lam = cut_disc_eigenvalues(R, R, 1)[0]
    mu = disc_eigenvalues(R, 1)[0]
    assert abs(lam - mu) / mu < 0.02


def test_half_disc_ground_state():
    lam = cut_disc_eigenvalues(R, 0.0, 1)[0]
    want = (special.jn_zeros(1, 1)[0] / R) ** 2
    assert abs(lam - want) / want < 0.02


def test_thin_cap_is_expensive():
    assert cut_disc_eigenvalues(R, -0.9 * R, 1)[0] > 10 * disc_eigenvalues(R, 1)[0]


def test_cut_disc_monotone_in_xi():
    xis = np.linspace(-0.6 * R, R, 9)
    lams = [cut_disc_eigenvalues(R, xi, 2, h=R / 32) for xi in xis]
    assert np.all(np.diff(np.array(lams), axis=0) <= 1e-9)


@pytest.mark.parametrize("xi", [-0.3 * R, 0.1 * R, 0.6 * R])
def test_cut_disc_continuity(xi):
    base = cut_disc_eigenvalues(R, xi, 1, h=R / 32)[0]
    jumps = [abs(cut_disc_eigenvalues(R, xi + d, 1, h=R / 32)[0] - base)
             for d in (0.04 * R, 0.02 * R, 0.01 * R)]
    assert jumps[0] > jumps[1] > jumps[2]


def test_cut_disc_errors():
    with pytest.raises(CutDiscError):
        cut_disc_eigenvalues(R, -R, 1)
    with pytest.raises(CutDiscError):
        cut_disc_eigenvalues(R, 0.0, 1, h=R / 16)
    with pytest.raises(CutDiscError):
        cut_disc_eigenvalues(R, -0.97 * R, 50, h=R / 32)


def test_cut_disc_window_skips_thin_caps():
    mu = disc_eigenvalues(R, 2)
    assert cut_disc_window(R, -0.95 * R, *mu).size == 0
    vals = cut_disc_window(R, 0.0, mu[0], 4 * mu[1])
    assert np.all((vals > mu[0]) & (vals < 4 * mu[1])) and vals.size >= 1


@pytest.mark.parametrize("theta", [0.05, 0.3, math.atan(0.5), math.pi / 4])
@pytest.mark.parametrize("r", [0.1, 0.3, 0.45])
def test_enumeration_matches_brute_force(theta, r):
    got = enumerate_cut_discs(r, theta, 30.0)
    want = brute_force_cut_discs(r, theta, 30.0)
    assert [(d.eta, d.center[0]) for d in got] == pytest.approx(want)
    assert all(abs(d.xi) < r for d in got)
    assert [d.j for d in got] == list(range(len(got)))


def test_half_discs_for_tan_one_third():
    discs = enumerate_cut_discs(0.1, RotationAngle.from_tan(1 / 3), 20.0)
    assert discs and any(abs(d.xi) < 1e-12 for d in discs)


def test_no_cut_discs_for_tan_two_thirds():
    assert enumerate_cut_discs(0.1, RotationAngle.from_tan(2 / 3), 200.0) == []


def test_enumeration_preconditions():
    with pytest.raises(ValueError):
        enumerate_cut_discs(0.1, 1.0, 10.0)
    with pytest.raises(ValueError):
        enumerate_cut_discs(0.1, 0.3, 0.0)


def test_rational_tangent_and_period():
    assert rational_tangent(TAN_HALF) == Fraction(1, 2)
    assert y_period(TAN_HALF) == pytest.approx(math.sqrt(5))
    assert rational_tangent(0.3) is None and y_period(0.3) is None


def test_rational_surface_spectrum_saturates():
    mu = disc_eigenvalues(0.3, 2)
    short = muffin_surface_spectrum(0.3, TAN_HALF, tuple(mu), 4.0, h=0.3 / 32)
    long = muffin_surface_spectrum(0.3, TAN_HALF, tuple(mu), 8.0, h=0.3 / 32)
    assert len(short.distinct()) == len(long.distinct()) >= 1
    assert sum(long.hits(5)) == len(long.values())


@pytest.fixture(scope="module")
def heights_table():
    mu = disc_eigenvalues(0.3, 2)
    return finite_height_convergence(0.3, TAN_HALF, [1e2, 1e3, 1e4], tuple(mu), 1 / 16)


def test_height_monotone_and_cauchy(heights_table):
    t = heights_table
    assert t.indices and t.monotone()
    d = t.differences()
    assert np.all(d[1] < d[0])
    assert np.all(t.values[-1] <= t.limit + 1e-9)


def test_free_subinterval_empty_at_large_height(heights_table):
    t = heights_table
    mu = disc_eigenvalues(0.3, 2)
    edges = np.concatenate([[mu[0]], t.limit, [mu[1]]])
    k = int(np.argmax(np.diff(edges)))
    lo, hi = edges[k], edges[k + 1]
    eps = (hi - lo) / 10
    grid, omega = muffin_grid(0.3, TAN_HALF, (-2.0, 2.0, 0.0, 4.0), 1 / 16)
    op = finite_height_operator(grid, omega, 1e5)
    assert count_interval(op, lo + eps, hi - eps) == 0


def test_heights_must_increase():
    with pytest.raises(ValueError):
        finite_height_convergence(0.3, TAN_HALF, [1e3, 1e2], (60.0, 160.0), 1 / 16)
