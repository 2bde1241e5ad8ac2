# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled banded LDL^H kernels.

Storage convention (shared with ``_ldlt_py``): ``band[j, d] = A[j + d, j]``
for the lower triangle, with ``band.shape[1] == bw + 2``.  The extra
diagonal holds the single row of fill that a 2x2 pivot adds to the first
column of its block.  Entries with ``j + d >= n`` must be zero on entry.
"""
from libc.math cimport fabs, sqrt, isfinite, INFINITY

ctypedef fused scalar:
    double
    double complex


cdef inline double _abs(scalar z) noexcept nogil:
    if scalar is double:
        return fabs(z)
    else:
        return sqrt(z.real * z.real + z.imag * z.imag)


cdef inline scalar _conj(scalar z) noexcept nogil:
    if scalar is double:
        return z
    else:
        return z.conjugate()


cdef inline double _re(scalar z) noexcept nogil:
    if scalar is double:
        return z
    else:
        return z.real


def ldlt_factor(scalar[:, ::1] band, Py_ssize_t n, Py_ssize_t bw,
                signed char[::1] blocks, double alpha):
    """Factor in place; return (negatives, min_pivot, ok)."""
    cdef Py_ssize_t k = 0, i, j, kmax, m
    cdef double colmax, colmax1, colmax_u, absa, ar, cr, det, g1, g2, piv
    cdef double minpiv = INFINITY
    cdef scalar a, b, lj, u_j, w_j, u_i, w_i
    cdef Py_ssize_t neg = 0
    cdef bint use2, ok = True
    cdef double[::1] wr
    cdef double complex[::1] wc
    cdef Py_ssize_t nbuf = 2 * (bw + 2)
    # work buffers for the two L columns of a 2x2 block
    if scalar is double:
        import numpy as np
        wr = np.zeros(nbuf, dtype=np.float64)
    else:
        import numpy as np
        wc = np.zeros(nbuf, dtype=np.complex128)

    with nogil:
        while k < n:
            kmax = bw if bw < n - 1 - k else n - 1 - k
            a = band[k, 0]
            ar = _re(a)
            absa = fabs(ar)
            colmax = 0.0
            colmax_u = 0.0
            for i in range(1, kmax + 1):
                g1 = _abs(band[k, i])
                if g1 > colmax:
                    colmax = g1
                if i >= 2 and g1 > colmax_u:
                    colmax_u = g1
            use2 = False
            if absa < alpha * colmax and k + 1 < n:
                b = band[k, 1]
                cr = _re(band[k + 1, 0])
                det = ar * cr - _abs(b) * _abs(b)
                colmax1 = 0.0
                m = bw if bw < n - 2 - k else n - 2 - k
                for i in range(1, m + 1):
                    g1 = _abs(band[k + 1, i])
                    if g1 > colmax1:
                        colmax1 = g1
                g1 = colmax / absa if absa > 0.0 else INFINITY
                if det != 0.0:
                    g2 = (colmax_u + colmax1) * (absa + 2.0 * _abs(b) + fabs(cr)) / fabs(det)
                else:
                    g2 = INFINITY
                use2 = g2 < g1
            if not use2:
                if ar == 0.0 or not isfinite(ar):
                    ok = False
                    break
                if absa < minpiv:
                    minpiv = absa
                if ar < 0.0:
                    neg += 1
                blocks[k] = 1
                band[k, 0] = ar
                for j in range(1, kmax + 1):
                    band[k, j] = band[k, j] / ar
                for j in range(1, kmax + 1):
                    lj = _conj(band[k, j]) * ar
                    if lj == 0:
                        continue
                    for i in range(j, kmax + 1):
                        band[k + j, i - j] = band[k + j, i - j] - band[k, i] * lj
                k += 1
            else:
                if not isfinite(det):
                    ok = False
                    break
                piv = fabs(det) / ((absa if absa > fabs(cr) else fabs(cr)) + _abs(b))
                if piv < minpiv:
                    minpiv = piv
                if det < 0.0:
                    neg += 1
                elif ar + cr < 0.0:
                    neg += 2
                blocks[k] = 2
                blocks[k + 1] = 0
                band[k, 0] = ar
                band[k + 1, 0] = cr
                m = bw + 1 if bw + 1 < n - 1 - k else n - 1 - k
                # L rows for i = 2..m relative to k
                for i in range(2, m + 1):
                    u_i = band[k, i] if i <= bw else 0
                    w_i = band[k + 1, i - 1]
                    if scalar is double:
                        wr[i] = (u_i * cr - w_i * b) / det
                        wr[bw + 2 + i] = (-u_i * b + w_i * ar) / det
                    else:
                        wc[i] = (u_i * cr - w_i * b) / det
                        wc[bw + 2 + i] = (-u_i * _conj(b) + w_i * ar) / det
                for j in range(2, m + 1):
                    u_j = _conj(band[k, j]) if j <= bw else 0
                    w_j = _conj(band[k + 1, j - 1])
                    for i in range(j, m + 1):
                        if scalar is double:
                            band[k + j, i - j] = band[k + j, i - j] - (
                                wr[i] * u_j + wr[bw + 2 + i] * w_j)
                        else:
                            band[k + j, i - j] = band[k + j, i - j] - (
                                wc[i] * u_j + wc[bw + 2 + i] * w_j)
                for i in range(2, m + 1):
                    if scalar is double:
                        band[k, i] = wr[i]
                        band[k + 1, i - 1] = wr[bw + 2 + i]
                    else:
                        band[k, i] = wc[i]
                        band[k + 1, i - 1] = wc[bw + 2 + i]
                k += 2
    return neg, minpiv, ok


def ldlt_solve(scalar[:, ::1] band, Py_ssize_t n, Py_ssize_t bw,
               signed char[::1] blocks, scalar[:, ::1] x):
    """Overwrite ``x`` (shape (n, p)) with the solution of L D L^H x = x."""
    cdef Py_ssize_t p = x.shape[1]
    cdef Py_ssize_t k, i, c, kmax, top
    cdef scalar lk, y0, y1, b, s0, s1
    cdef double ar, cr, det
    with nogil:
        # forward substitution with unit lower L
        k = 0
        while k < n:
            if blocks[k] == 1:
                kmax = bw if bw < n - 1 - k else n - 1 - k
                for i in range(1, kmax + 1):
                    lk = band[k, i]
                    if lk == 0:
                        continue
                    for c in range(p):
                        x[k + i, c] = x[k + i, c] - lk * x[k, c]
                k += 1
            else:
                kmax = bw + 1 if bw + 1 < n - 1 - k else n - 1 - k
                for i in range(2, kmax + 1):
                    lk = band[k, i]
                    if lk == 0:
                        continue
                    for c in range(p):
                        x[k + i, c] = x[k + i, c] - lk * x[k, c]
                kmax = bw if bw < n - 2 - k else n - 2 - k
                for i in range(1, kmax + 1):
                    lk = band[k + 1, i]
                    if lk == 0:
                        continue
                    for c in range(p):
                        x[k + 1 + i, c] = x[k + 1 + i, c] - lk * x[k + 1, c]
                k += 2
        # block diagonal
        k = 0
        while k < n:
            if blocks[k] == 1:
                ar = _re(band[k, 0])
                for c in range(p):
                    x[k, c] = x[k, c] / ar
                k += 1
            else:
                ar = _re(band[k, 0])
                cr = _re(band[k + 1, 0])
                b = band[k, 1]
                det = ar * cr - _abs(b) * _abs(b)
                for c in range(p):
                    y0 = x[k, c]
                    y1 = x[k + 1, c]
                    x[k, c] = (cr * y0 - _conj(b) * y1) / det
                    x[k + 1, c] = (-b * y0 + ar * y1) / det
                k += 2
        # backward substitution with L^H
        k = n - 1
        while k >= 0:
            if blocks[k] == 1:
                top = k
            elif blocks[k] == 0:
                top = k - 1
            else:
                top = k
            if blocks[top] == 1:
                kmax = bw if bw < n - 1 - k else n - 1 - k
                for c in range(p):
                    s0 = x[k, c]
                    for i in range(1, kmax + 1):
                        s0 = s0 - _conj(band[k, i]) * x[k + i, c]
                    x[k, c] = s0
                k -= 1
            else:
                # block (top, top + 1); here k == top + 1
                for c in range(p):
                    s1 = x[top + 1, c]
                    kmax = bw if bw < n - 2 - top else n - 2 - top
                    for i in range(1, kmax + 1):
                        s1 = s1 - _conj(band[top + 1, i]) * x[top + 1 + i, c]
                    x[top + 1, c] = s1
                    s0 = x[top, c]
                    kmax = bw + 1 if bw + 1 < n - 1 - top else n - 1 - top
                    for i in range(2, kmax + 1):
                        s0 = s0 - _conj(band[top, i]) * x[top + i, c]
                    x[top, c] = s0
                k = top - 1
    return None
