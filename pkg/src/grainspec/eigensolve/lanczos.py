"""Shift-invert block Lanczos for eigenpairs nearest a shift.

The Krylov basis is kept fully orthogonal (two passes of classical
Gram-Schmidt), so the projected matrix is formed explicitly and the
method is robust to clustered and repeated eigenvalues.  After the Ritz
pairs converge, completeness of the set is cross-checked against the
inertia count of the window they span.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .ldlt import Factorization, count_interval
from .operator import as_operator


class ConvergenceError(RuntimeError):
    """Raised when eigenpairs do not converge within the solve budget."""


@dataclass(frozen=True)
class EigenPair:
    value: float
    vector: np.ndarray
    residual: float


def _orthonormalize(w, bases, rng, rank_tol=1e-10):
    """Orthogonalize ``w`` against the columns of ``bases`` and itself."""
    norm0 = np.linalg.norm(w, axis=0)
    for _ in range(2):
        for q in bases:
            if q.shape[1]:
                w = w - q @ (q.conj().T @ w)
    q, r = np.linalg.qr(w)
    keep = np.abs(np.diag(r)) > rank_tol * np.maximum(norm0.max(initial=0.0), 1.0)
    if keep.all():
        return q
    # invariant subspace reached in some directions: refill with random vectors
    fresh = rng.standard_normal(w.shape)
    if np.iscomplexobj(w):
        fresh = fresh + 1j * rng.standard_normal(w.shape)
    q_keep = q[:, keep]
    for _ in range(2):
        for b in list(bases) + [q_keep]:
            if b.shape[1]:
                fresh = fresh - b @ (b.conj().T @ fresh)
    q2, _ = np.linalg.qr(fresh[:, : (~keep).sum()])
    return np.hstack([q_keep, q2])


def eigenpairs_near(op, sigma, count, *, tol=1e-8, max_iter=2000, block=None,
                    factorization=None, backend=None, seed=0):
    """The ``count`` eigenpairs of ``op`` nearest ``sigma``, sorted by distance.

    ``max_iter`` bounds the number of solves with ``A - sigma I``.
    """
    op = as_operator(op)
    n = op.dimension
    if count < 1:
        raise ValueError("count must be at least 1")
    if count > n:
        raise ValueError(f"count={count} exceeds the dimension {n}")
    fac = factorization or Factorization(op, sigma, backend)
    norm = op.norm1
    thresh = tol * max(norm, np.finfo(float).tiny)
    rng = np.random.default_rng(seed)
    dtype = np.complex128 if op.is_complex else np.float64
    A = op.matrix

    def random_block(p):
        x = rng.standard_normal((n, p))
        if op.is_complex:
            x = x + 1j * rng.standard_normal((n, p))
        return x.astype(dtype)

    need = count
    p = block or min(max(need, 2), 8, n)
    max_basis = min(n, max(3 * need + 2 * p, 40))
    Q = np.zeros((n, 0), dtype=dtype)
    W_all = np.zeros((n, 0), dtype=dtype)
    nxt = _orthonormalize(random_block(p), [], rng)
    solves = 0
    while True:
        if Q.shape[1] + nxt.shape[1] > n:
            nxt = nxt[:, : n - Q.shape[1]]
        W = fac.solve(nxt)
        solves += nxt.shape[1]
        Q = np.hstack([Q, nxt])
        W_all = np.hstack([W_all, W])
        T = Q.conj().T @ W_all
        T = 0.5 * (T + T.conj().T)
        theta, S = sla.eigh(T)
        order = np.argsort(-np.abs(theta))
        wanted = order[: min(need, theta.size)]
        X = Q @ S[:, wanted]
        AX = A @ X
        lam = np.real(np.sum(X.conj() * AX, axis=0))
        res = np.linalg.norm(AX - X * lam, axis=0)
        full = Q.shape[1] >= n
        if wanted.size == need and (np.all(res <= thresh) or full):
            pairs = [EigenPair(float(l), X[:, i].copy(), float(r))
                     for i, (l, r) in enumerate(zip(lam, res))]
            missing = _missing(op, sigma, pairs, thresh, backend)
            if missing == 0:
                if not np.all(res <= thresh):
                    raise ConvergenceError(
                        f"residuals above {thresh:.3g} at shift {sigma!r} with a full basis")
                pairs.sort(key=lambda e: abs(e.value - sigma))
                return pairs[:count]
            need += missing
            max_basis = min(n, max(max_basis, 3 * need + 2 * p))
        if solves >= max_iter:
            raise ConvergenceError(
                f"eigenpairs near shift {sigma!r} did not converge within {max_iter} solves")
        if full:
            raise ConvergenceError(f"Krylov space exhausted at shift {sigma!r}")
        if Q.shape[1] + p > max_basis:
            # restart with the wanted Ritz vectors (explicit thick restart)
            keep = order[: min(theta.size, need + p)]
            Sk = S[:, keep]
            Q = Q @ Sk
            W_all = W_all @ Sk
            R = W_all - Q * theta[keep]
            worst = np.argsort(-np.linalg.norm(R, axis=0))[:p]
            nxt = _orthonormalize(R[:, worst], [Q], rng)
        else:
            nxt = _orthonormalize(W, [Q], rng)


def _missing(op, sigma, pairs, thresh, backend):
    """How many eigenvalues strictly closer than the farthest found one are absent."""
    dist = np.array([abs(e.value - sigma) for e in pairs])
    radius = dist.max()
    inner = radius - 4 * thresh
    if inner <= 4 * thresh:
        return 0
    found = int(np.sum(dist < inner))
    true = count_interval(op, sigma - inner, sigma + inner, backend)
    return max(true - found, 0)
