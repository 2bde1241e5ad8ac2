"""Sparse Hermitian operator with a bandwidth-reducing node ordering."""
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import reverse_cuthill_mckee


def _bandwidth(mat, perm):
    coo = mat.tocoo()
    if coo.nnz == 0:
        return 0
    pinv = np.empty_like(perm)
    pinv[perm] = np.arange(perm.size)
    return int(np.max(np.abs(pinv[coo.row] - pinv[coo.col])))


def best_ordering(mat):
    """Return (perm, bandwidth), the better of natural order and RCM."""
    n = mat.shape[0]
    natural = np.arange(n)
    bw_nat = _bandwidth(mat, natural)
    if bw_nat <= 2 * int(np.sqrt(n)) + 2:
        return natural, bw_nat
    pattern = sp.csr_matrix((np.ones(mat.nnz), mat.indices, mat.indptr), shape=mat.shape)
    rcm = np.asarray(reverse_cuthill_mckee(pattern, symmetric_mode=True), dtype=np.int64)
    bw_rcm = _bandwidth(mat, rcm)
    if bw_rcm < bw_nat:
        return rcm, bw_rcm
    return natural, bw_nat


@dataclass(frozen=True, eq=False)
class SparseSymmetricOperator:
    """Real symmetric or complex Hermitian sparse matrix.

    ``x`` and ``y`` hold the physical node coordinates when the operator
    comes from a grid (empty arrays otherwise); ``shape`` is the node grid
    shape (nx, ny) when the nodes fill a full tensor grid.
    """

    matrix: sp.csr_matrix
    x: np.ndarray = field(default_factory=lambda: np.empty(0))
    y: np.ndarray = field(default_factory=lambda: np.empty(0))
    shape: tuple = ()
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        mat = sp.csr_matrix(self.matrix)
        mat.sum_duplicates()
        mat.sort_indices()
        object.__setattr__(self, "matrix", mat)
        perm, bw = best_ordering(mat)
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "bandwidth", bw)

    @property
    def dimension(self):
        return self.matrix.shape[0]

    @property
    def is_complex(self):
        return np.iscomplexobj(self.matrix.data)

    @property
    def norm1(self):
        cached = self.__dict__.get("_norm1")
        if cached is None:
            cached = float(abs(self.matrix).sum(axis=0).max()) if self.matrix.nnz else 0.0
            object.__setattr__(self, "_norm1", cached)
        return cached

    def matvec(self, v):
        return self.matrix @ v

    def band_storage(self, shift=0.0, pad=True):
        """Lower band of P (A - shift I) P^T, layout ``band[j, d] = A[j+d, j]``."""
        n, bw = self.dimension, self.bandwidth
        dtype = np.complex128 if self.is_complex else np.float64
        rows = n + bw + 2 if pad else n
        band = np.zeros((rows, bw + 2), dtype=dtype)
        coo = self.matrix.tocoo()
        pinv = np.empty_like(self.perm)
        pinv[self.perm] = np.arange(n)
        r, c = pinv[coo.row], pinv[coo.col]
        low = r >= c
        band[c[low], r[low] - c[low]] = coo.data[low]
        band[:n, 0] -= shift
        return band

    def to_dense(self):
        return self.matrix.toarray()


def as_operator(a):
    """Wrap a dense array or scipy sparse matrix as an operator."""
    if isinstance(a, SparseSymmetricOperator):
        return a
    if sp.issparse(a):
        return SparseSymmetricOperator(sp.csr_matrix(a))
    arr = np.asarray(a)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("operator must be a square matrix")
    return SparseSymmetricOperator(sp.csr_matrix(arr))
