import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from grainspec.alignment import (TorusTranslation, find_alignment, find_spaced_alignments,
                                 frac_mul, rational_dependence)
from grainspec.potentials import RotationAngle


def _frac_exact(m, x):
    # exact fractional part of m * x for the double x
    v = Fraction(int(m)) * Fraction(x)
    return float(v - math.floor(v))


@given(st.integers(1, 10**9), st.floats(0.01, 1.5))
def test_frac_mul_matches_exact(m, theta):
    x = math.tan(theta)
    got = float(frac_mul(np.int64(m), x))
    want = _frac_exact(m, x)
    assert min(abs(got - want), 1 - abs(got - want)) < 1e-9


def test_iterate_matches_orbit():
    tr = TorusTranslation(0.05)
    for m in (1, 17, 1000, 20000):
        fx, fy = tr.orbit(m)
        ix, iy = tr.iterate(m)
        assert abs(ix - float(fx)) < 1e-9 and abs(iy - float(fy)) < 1e-9


def test_find_alignment_example():
    sol = find_alignment(0.05, 0.5, 0.2, 10**6)
    assert sol is not None and sol.verify()
    assert sol.residual_x < 0.05 and sol.residual_y < 0.05
    # oracle: recompute with high-precision arithmetic
    mpmath.mp.dps = 40
    tan = mpmath.mpf(RotationAngle(0.05).tan)
    sec = 1 / mpmath.mpf(RotationAngle(0.05).cos)
    fx = sol.m * tan - mpmath.floor(sol.m * tan)
    assert abs(float(fx) - 0.5) < 0.05
    assert abs(sol.m * sec - sol.N) < 0.05


@pytest.mark.parametrize("theta,t,eps", [(0.05, 0.5, 0.2), (0.3, 0.2, 0.3), (0.11, 0.7, 0.4)])
def test_find_alignment_is_minimal(theta, t, eps):
    sol = find_alignment(theta, t, eps, 20000)
    assert sol is not None
    tan, sec = math.tan(theta), 1 / math.cos(theta)
    for m in range(1, sol.m):
        fx = _frac_exact(m, tan)
        fy = _frac_exact(m, sec)
        assert not (abs(fx - t) < eps / 4 and min(fy, 1 - fy) < eps / 4)


def test_resonant_angle_has_no_alignment():
    theta = RotationAngle.from_cos(4 / 5)
    assert find_alignment(theta, 0.37, 0.01, 10**5) is None


def test_find_alignment_rejects_bad_input():
    with pytest.raises(ValueError):
        find_alignment(0.1, 1.2, 0.2, 100)
    with pytest.raises(ValueError):
        find_alignment(0.1, 0.5, -0.2, 100)
    with pytest.raises(ValueError):
        find_alignment(0.1, 0.5, 0.2, 0)


def test_spaced_alignments_density():
    eps, nu = 0.2, 4
    s = find_spaced_alignments(0.05, 0.5, eps, nu, 4000)
    expected = eps ** 2 / (8 * nu)
    assert expected / 4 <= s.density_estimate <= 4 * expected
    ms = [sol.m for sol in s.solutions]
    assert all(b - a >= 2 * nu for a, b in zip(ms, ms[1:]))
    assert all(sol.verify() and sol.m < 1000 for sol in s.solutions)


def test_spaced_alignments_stable_under_doubling():
    d1 = find_spaced_alignments(0.05, 0.5, 0.2, 4, 40000).density_estimate
    d2 = find_spaced_alignments(0.05, 0.5, 0.2, 4, 80000).density_estimate
    assert abs(d2 - d1) < 0.5 * d1


def test_spaced_alignments_empty():
    theta = RotationAngle.from_cos(4 / 5)
    s = find_spaced_alignments(theta, 0.37, 0.01, 1, 400)
    assert s.solutions == () and s.density_estimate == 0


def test_rational_dependence_examples():
    assert rational_dependence(math.pi / 4, 5) == (1, -1, 0)
    theta = RotationAngle.from_cos(4 / 5)
    n1, n2, n3 = rational_dependence(theta, 20)
    assert abs(n1 + n2 * theta.tan + n3 / theta.cos) < 1e-10
    assert rational_dependence(math.atan(math.pi), 50) is None


def test_rational_slope_has_finitely_many_fractional_parts():
    theta = RotationAngle.from_tan(3 / 4)
    fx, _ = TorusTranslation(theta).orbit(np.arange(1, 2000))
    assert len(np.unique(np.round(fx, 9) % 1.0)) == 4
