"""Banded symmetric-indefinite factorization and Sylvester inertia.

The factorization is ``P (A - s I) P^T = L D L^H`` with unit lower banded
``L`` and block diagonal ``D`` of 1x1 and 2x2 pivots.  Pivots are chosen
inside the band only (no row interchanges), with a Bunch-Kaufman style
growth test between the 1x1 and the 2x2 candidate, so the band is never
widened by more than one fill diagonal.
"""
import os
from dataclasses import dataclass

import numpy as np

from . import _ldlt_py
from .operator import as_operator

try:
    from . import _ldlt_ext
except ImportError:  # extension not built
    _ldlt_ext = None

ALPHA = (1.0 + np.sqrt(17.0)) / 8.0
TINY_PIVOT = 1e-10
PERTURBATION = 1e-8

AVAILABLE_BACKENDS = ("compiled", "python") if _ldlt_ext is not None else ("python",)
if os.environ.get("GRAINSPEC_BACKEND", "").lower() == "python" or _ldlt_ext is None:
    BACKEND = "python"
else:
    BACKEND = "compiled"


class FactorizationError(RuntimeError):
    """Raised when the factorization breaks down even after perturbation."""


def factor_band(band, n, bw, backend=None):
    """Run the selected kernel in place; return (blocks, negatives, min_pivot, ok)."""
    backend = backend or BACKEND
    blocks = np.zeros(max(n, 1), dtype=np.int8)
    if backend == "compiled":
        if _ldlt_ext is None:
            raise RuntimeError("compiled LDL^T kernel is not available")
        neg, minpiv, ok = _ldlt_ext.ldlt_factor(band, n, bw, blocks, ALPHA)
    elif backend == "python":
        neg, minpiv, ok = _ldlt_py.ldlt_factor(band, n, bw, blocks, ALPHA)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return blocks, int(neg), float(minpiv), bool(ok)


@dataclass(frozen=True)
class InertiaCount:
    """Number of eigenvalues strictly below ``shift``."""

    shift: float
    negatives: int
    factorization_status: str = "ok"


class Factorization:
    """LDL^H factorization of ``A - shift I`` with solves in the original ordering."""

    def __init__(self, op, shift, backend=None):
        self.op = as_operator(op)
        self.backend = backend or BACKEND
        norm = max(self.op.norm1, np.finfo(float).tiny)
        self.requested_shift = float(shift)
        status = "ok"
        for attempt in range(3):
            s = float(shift) + attempt * PERTURBATION * norm
            band = self.op.band_storage(s)
            n, bw = self.op.dimension, self.op.bandwidth
            blocks, neg, minpiv, ok = factor_band(band, n, bw, self.backend)
            if ok and (n == 0 or minpiv > TINY_PIVOT * norm):
                break
            status = "pivot-perturbed"
        else:
            raise FactorizationError(
                f"LDL^T breakdown at shift {shift!r} after perturbation")
        self.shift = s
        self.status = status
        self.negatives = neg
        self.min_pivot = minpiv
        self._band, self._blocks = band, blocks
        self._solve_data = None

    @property
    def inertia(self):
        return InertiaCount(self.requested_shift, self.negatives, self.status)

    def solve(self, rhs):
        """Solve (A - shift I) x = rhs for a vector or a block of columns."""
        rhs = np.asarray(rhs)
        vec = rhs.ndim == 1
        b = rhs[:, None] if vec else rhs
        n, bw = self.op.dimension, self.op.bandwidth
        dtype = np.result_type(self._band.dtype, b.dtype)
        perm = self.op.perm
        x = np.ascontiguousarray(b[perm], dtype=dtype)
        if self.backend == "compiled":
            band = self._band if dtype == self._band.dtype else self._band.astype(dtype)
            _ldlt_ext.ldlt_solve(band, n, bw, self._blocks, x)
        else:
            if self._solve_data is None:
                self._solve_data = _ldlt_py.SolveData(self._band, n, bw, self._blocks)
            if dtype != self._band.dtype:
                # real factor, complex right-hand side
                x = (_ldlt_py.ldlt_solve(self._solve_data, np.ascontiguousarray(x.real))
                     + 1j * _ldlt_py.ldlt_solve(self._solve_data, np.ascontiguousarray(x.imag)))
            else:
                x = _ldlt_py.ldlt_solve(self._solve_data, x)
        out = np.empty_like(x)
        out[perm] = x
        return out[:, 0] if vec else out


def factorize(op, shift, backend=None):
    return Factorization(op, shift, backend)


def count_below(op, sigma, backend=None):
    """Inertia count of eigenvalues below ``sigma``."""
    return Factorization(op, sigma, backend).inertia


def count_interval(op, alpha, beta, backend=None):
    """Number of eigenvalues in [alpha, beta), counted with multiplicity."""
    if not alpha < beta:
        raise ValueError(f"empty interval: alpha={alpha!r} must be below beta={beta!r}")
    op = as_operator(op)
    return count_below(op, beta, backend).negatives - count_below(op, alpha, backend).negatives
