"""Integer-order Bessel functions and their zeros, without external special functions."""
import math

import numpy as np

ZERO_TOL = 1e-12


def besselj(nu, x):
    """J_nu(x) for integer nu >= 0 and real x >= 0 by Miller's backward recurrence.

    The recurrence J_{k-1} = (2k/x) J_k - J_{k+1} is started far above
    max(nu, x) and normalized with J_0 + 2 sum J_{2k} = 1.
    """
    nu = int(nu)
    if nu < 0:
        raise ValueError("order must be a nonnegative integer")
    x = float(x)
    if x == 0.0:
        return 1.0 if nu == 0 else 0.0
    if x < 0:
        return (-1) ** nu * besselj(nu, -x)
    top = max(nu, int(x)) + 20 + int(math.sqrt(40 * max(nu, x, 1.0)))
    top += top % 2
    j_next, j_cur = 0.0, 1e-300
    norm, value = 0.0, 0.0
    for k in range(top, 0, -1):
        j_prev = 2 * k / x * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        # j_cur now holds J_{k-1}
        if k - 1 == nu:
            value = j_cur
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2 * j_cur
        if abs(j_cur) > 1e250:
            j_cur *= 1e-250
            j_next *= 1e-250
            norm *= 1e-250
            value *= 1e-250
    norm += j_cur
    return value / norm


def _bisect(f, lo, hi, flo):
    while hi - lo > ZERO_TOL * max(1.0, abs(hi)):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def bessel_zeros(nu, x_max, step=0.25):
    """All positive zeros of J_nu below x_max, by bracketing and bisection.

    Consecutive zeros are more than pi/2 apart, so a scan with step 0.25
    cannot skip a sign change.
    """
    f = lambda x: besselj(nu, x)
    zeros = []
    lo = max(float(nu), step)
    flo = f(lo)
    while lo < x_max:
        hi = lo + step
        fhi = f(hi)
        if flo == 0.0:
            zeros.append(lo)
        elif (flo < 0) != (fhi < 0):
            z = _bisect(f, lo, hi, flo)
            if z < x_max:
                zeros.append(z)
        lo, flo = hi, fhi
    return zeros


def disc_spectrum(r, k, tol=1e-9):
    """Smallest k distinct Dirichlet eigenvalues of the radius-r disc and multiplicities."""
    if r <= 0 or k < 1:
        raise ValueError("need r > 0 and k >= 1")
    x_max = 4.0
    while True:
        found = []
        for nu in range(int(x_max) + 1):
            zs = bessel_zeros(nu, x_max)
            if not zs:
                break
            found.extend((z, 1 if nu == 0 else 2) for z in zs)
        found.sort()
        values, mult = [], []
        for z, m in found:
            mu = (z / r) ** 2
            if values and abs(mu - values[-1]) <= tol:
                mult[-1] += m
            else:
                values.append(mu)
                mult.append(m)
        if len(values) >= k:
            return np.array(values[:k]), np.array(mult[:k])
        x_max *= 1.5


def disc_eigenvalues(r, k):
    """mu_1(r) < ... < mu_k(r) as (j_{nu,s} / r)^2."""
    return disc_spectrum(r, k)[0]
