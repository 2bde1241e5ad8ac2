"""Inertia counting and shift-invert eigenpairs for banded Hermitian operators.

``BACKEND`` names the LDL^T kernel in use: ``"compiled"`` when the Cython
extension was built, otherwise ``"python"``.  Setting the environment
variable ``GRAINSPEC_BACKEND=python`` forces the numpy fallback.
"""
from .lanczos import ConvergenceError, EigenPair, eigenpairs_near
from .ldlt import (AVAILABLE_BACKENDS, BACKEND, Factorization, FactorizationError,
                   InertiaCount, count_below, count_interval, factorize)
from .operator import SparseSymmetricOperator, as_operator

__all__ = [
    "AVAILABLE_BACKENDS", "BACKEND", "ConvergenceError", "EigenPair", "Factorization",
    "FactorizationError", "InertiaCount", "SparseSymmetricOperator", "as_operator",
    "count_below", "count_interval", "eigenpairs_near", "factorize",
]
