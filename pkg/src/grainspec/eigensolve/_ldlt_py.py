"""Pure numpy banded LDL^H kernels.

Same storage contract as the compiled kernel: ``band[j, d] = A[j + d, j]``
with ``band.shape[1] == bw + 2``.  The array must also carry at least
``bw + 2`` zero padding rows below row ``n`` so that the trailing update of
the last columns can be written without bounds checks.
"""
from functools import lru_cache

import numpy as np
from scipy.linalg import lapack


@lru_cache(maxsize=32)
def _update_offsets(bw, width, first):
    # flat offsets of band[k + j, i - j] relative to band[k, 0], for
    # first <= j <= i <= last
    last = bw if first == 1 else bw + 1
    ii, jj = np.tril_indices(last - first + 1)
    ii = ii + first
    jj = jj + first
    off = jj * width + (ii - jj)
    return ii, jj, off


def ldlt_factor(band, n, bw, blocks, alpha):
    """Factor ``band`` in place; return (negatives, min_pivot, ok)."""
    width = band.shape[1]
    if band.shape[0] < n + bw + 2:
        raise ValueError("band storage needs bw + 2 padding rows")
    flat = band.reshape(-1)
    conj = np.conj if np.iscomplexobj(band) else (lambda z: z)
    i1, j1, off1 = _update_offsets(bw, width, 1)
    i2, j2, off2 = _update_offsets(bw, width, 2)
    neg = 0
    minpiv = np.inf
    k = 0
    while k < n:
        col = band[k]
        kmax = min(bw, n - 1 - k)
        ar = col[0].real
        absa = abs(ar)
        mags = np.abs(col[1:kmax + 1])
        colmax = mags.max() if kmax else 0.0
        use2 = False
        if absa < alpha * colmax and k + 1 < n:
            b = col[1]
            cr = band[k + 1, 0].real
            det = ar * cr - abs(b) ** 2
            m1 = min(bw, n - 2 - k)
            colmax1 = np.abs(band[k + 1, 1:m1 + 1]).max() if m1 > 0 else 0.0
            colmax_u = mags[1:].max() if kmax >= 2 else 0.0
            g1 = colmax / absa if absa > 0 else np.inf
            g2 = ((colmax_u + colmax1) * (absa + 2 * abs(b) + abs(cr)) / abs(det)
                  if det != 0 else np.inf)
            use2 = g2 < g1
        if not use2:
            if ar == 0 or not np.isfinite(ar):
                return neg, minpiv, False
            minpiv = min(minpiv, absa)
            neg += ar < 0
            blocks[k] = 1
            col[0] = ar
            c = col[1:bw + 1].copy()
            flat[k * width + off1] -= c[i1 - 1] * conj(c[j1 - 1]) / ar
            col[1:bw + 1] = c / ar
            k += 1
        else:
            if not np.isfinite(det):
                return neg, minpiv, False
            minpiv = min(minpiv, abs(det) / (max(absa, abs(cr)) + abs(b)))
            if det < 0:
                neg += 1
            elif ar + cr < 0:
                neg += 2
            blocks[k] = 2
            blocks[k + 1] = 0
            col[0] = ar
            band[k + 1, 0] = cr
            # u_i = A[k+i, k], w_i = A[k+i, k+1] for i = 2..bw+1
            u = col[2:bw + 2].copy()
            w = band[k + 1, 1:bw + 1].copy()
            l0 = (u * cr - w * b) / det
            l1 = (-u * conj(b) + w * ar) / det
            s, t = i2 - 2, j2 - 2
            flat[k * width + off2] -= l0[s] * conj(u[t]) + l1[s] * conj(w[t])
            col[2:bw + 2] = l0
            band[k + 1, 1:bw + 1] = l1
            k += 2
    return int(neg), float(minpiv), True


class SolveData:
    """LAPACK-ready triangular factor and block diagonal for repeated solves."""

    def __init__(self, band, n, bw, blocks):
        self.n = n
        self.complex = np.iscomplexobj(band)
        lower = band[:n].copy()
        starts2 = np.flatnonzero(blocks[:n] == 2)
        lower[starts2, 1] = 0
        lower[:, 0] = 1
        self.ab = np.asfortranarray(lower.T)
        self.ones = np.flatnonzero(blocks[:n] == 1)
        self.d1 = band[self.ones, 0].real
        self.s2 = starts2
        a = band[starts2, 0].real
        c = band[starts2 + 1, 0].real
        b = band[starts2, 1]
        det = a * c - np.abs(b) ** 2
        self.a, self.b, self.c, self.det = a, b, c, det
        self.tbtrs = lapack.ztbtrs if self.complex else lapack.dtbtrs


def ldlt_solve(data, x):
    """Return the solution of L D L^H y = x for a 2-D right-hand side."""
    trans = "C" if data.complex else "T"
    y, info = data.tbtrs(data.ab, x, uplo="L", trans="N", diag="U")
    if info != 0:
        raise np.linalg.LinAlgError("triangular solve failed")
    y[data.ones] /= data.d1[:, None]
    s = data.s2
    y0, y1 = y[s].copy(), y[s + 1].copy()
    b = data.b[:, None]
    bc = np.conj(b) if data.complex else b
    y[s] = (data.c[:, None] * y0 - bc * y1) / data.det[:, None]
    y[s + 1] = (-b * y0 + data.a[:, None] * y1) / data.det[:, None]
    z, info = data.tbtrs(data.ab, y, uplo="L", trans=trans, diag="U")
    if info != 0:
        raise np.linalg.LinAlgError("triangular solve failed")
    return z
