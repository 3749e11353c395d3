"""Eigensolvers for real symmetric operators.

Small operators are diagonalized densely; larger ones go through a Lanczos
iteration with full reorthogonalization, optionally deflating a set of known
eigenvectors so that successive low eigenvalues can be peeled off.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal
from scipy.sparse.linalg import LinearOperator

from .errors import DimensionMismatch, SolverNoConvergence

DENSE_LIMIT = 512


@dataclass
class LanczosInfo:
    iterations: int = 0
    restarts: int = 0
    residual: float = float("nan")
    converged: bool = False
    history: list = field(default_factory=list)


def as_linear_operator(op) -> LinearOperator:
    """Coerce arrays, sparse matrices and objects exposing ``apply`` into a LinearOperator."""
    if isinstance(op, LinearOperator):
        return op
    if hasattr(op, "as_linear_operator"):
        return op.as_linear_operator()
    if sp.issparse(op):
        return sp.linalg.aslinearoperator(op.tocsr())
    arr = np.asarray(op)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(f"operator must be square, got shape {arr.shape}")
    return sp.linalg.aslinearoperator(arr)


def to_dense(op) -> np.ndarray:
    if hasattr(op, "to_sparse"):
        op = op.to_sparse()
    if sp.issparse(op):
        return op.toarray()
    if isinstance(op, LinearOperator):
        return op @ np.eye(op.shape[0])
    return np.asarray(op)


def norm_estimate(op) -> float:
    """Max absolute row sum; an upper bound on the spectral norm of a symmetric operator."""
    if hasattr(op, "to_sparse"):
        op = op.to_sparse()
    if sp.issparse(op):
        if op.shape[0] == 0:
            return 0.0
        return float(abs(op).sum(axis=1).max())
    if isinstance(op, LinearOperator):
        # no cheap bound; fall back to a few power iterations with a safety factor
        rng = np.random.default_rng(0)
        x = rng.standard_normal(op.shape[0])
        x /= np.linalg.norm(x)
        est = 0.0
        for _ in range(30):
            y = op.matvec(x)
            est = np.linalg.norm(y)
            if est == 0:
                return 0.0
            x = y / est
        return 2.0 * float(est)
    arr = np.asarray(op)
    if arr.size == 0:
        return 0.0
    return float(np.abs(arr).sum(axis=1).max())


def default_tol(op) -> float:
    return 1e-10 * max(1.0, norm_estimate(op))


def _orthonormal_columns(vectors, n):
    if vectors is None or len(vectors) == 0:
        return None
    Q = np.column_stack([np.asarray(v, dtype=float) for v in vectors])
    if Q.shape[0] != n:
        raise DimensionMismatch("deflation vectors have wrong length")
    Q, _ = np.linalg.qr(Q)
    return Q


def lanczos_smallest(
    op,
    tol: float | None = None,
    *,
    deflate=None,
    v0=None,
    krylov_dim: int = 200,
    max_restarts: int = 50,
    seed: int = 0,
):
    """Smallest eigenpair of a real symmetric operator by restarted Lanczos.

    Vectors in ``deflate`` must be (near) eigenvectors; they are projected out
    of every Krylov vector so the iteration runs in their orthogonal complement.

    Returns ``(eigenvalue, eigenvector, LanczosInfo)``. The convergence test is
    the Ritz residual ``||A y - theta y|| <= tol``.
    """
    A = as_linear_operator(op)
    n = A.shape[0]
    if tol is None:
        tol = default_tol(op)
    D = _orthonormal_columns(deflate, n)
    free_dim = n - (0 if D is None else D.shape[1])
    if free_dim <= 0:
        raise DimensionMismatch("deflation space fills the whole space")

    def project(x):
        if D is not None:
            x = x - D @ (D.T @ x)
        return x

    rng = np.random.default_rng(seed)
    q = rng.standard_normal(n) if v0 is None else np.array(v0, dtype=float)
    q = project(q)
    q /= np.linalg.norm(q)

    m_max = min(krylov_dim, free_dim)
    info = LanczosInfo()
    best = (np.inf, q, np.inf)
    for restart in range(max_restarts + 1):
        info.restarts = restart
        Q = np.zeros((n, m_max))
        alphas = np.zeros(m_max)
        betas = np.zeros(m_max)
        Q[:, 0] = q
        m = 0
        for k in range(m_max):
            m = k + 1
            w = project(A.matvec(Q[:, k]))
            alphas[k] = Q[:, k] @ w
            w -= alphas[k] * Q[:, k]
            if k > 0:
                w -= betas[k - 1] * Q[:, k - 1]
            # two passes of classical Gram-Schmidt keep the basis orthogonal to working precision
            for _ in range(2):
                w -= Q[:, :m] @ (Q[:, :m].T @ w)
            w = project(w)
            beta = np.linalg.norm(w)
            betas[k] = beta
            info.iterations += 1
            last = k == m_max - 1
            invariant = beta <= 1e-14 * max(1.0, abs(alphas[k]))
            if invariant or last or (m % 10 == 0):
                if m == 1:
                    theta, s = np.array([alphas[0]]), np.ones((1, 1))
                else:
                    theta, s = eigh_tridiagonal(
                        alphas[:m], betas[: m - 1], select="i", select_range=(0, 0)
                    )
                res = abs(beta * s[-1, 0])
                info.history.append((info.iterations, float(theta[0]), float(res)))
                if res < best[2] or invariant:
                    best = (float(theta[0]), Q[:, :m] @ s[:, 0], float(res))
                if res <= tol or invariant:
                    y = best[1]
                    y /= np.linalg.norm(y)
                    info.residual = float(np.linalg.norm(A.matvec(y) - best[0] * y))
                    info.converged = True
                    return best[0], y, info
            if last:
                break
            Q[:, k + 1] = w / beta
        # restart from the best Ritz vector seen so far
        q = project(best[1])
        q /= np.linalg.norm(q)
    info.residual = best[2]
    raise SolverNoConvergence(
        f"Lanczos did not reach residual {tol:.3g} (best {best[2]:.3g})",
        diagnostics={
            "iterations": info.iterations,
            "restarts": info.restarts,
            "best_residual": best[2],
            "best_value": best[0],
            "tol": tol,
        },
    )


def smallest_eigenvalue(op, tol: float | None = None, *, dense_limit: int = DENSE_LIMIT, seed: int = 0) -> float:
    """Smallest eigenvalue; dense below ``dense_limit``, Lanczos above."""
    n = as_linear_operator(op).shape[0]
    if n == 0:
        raise DimensionMismatch("empty operator")
    if n <= dense_limit:
        return float(np.linalg.eigvalsh(to_dense(op))[0])
    value, _, _ = lanczos_smallest(op, tol, seed=seed)
    return value


def smallest_eigenpair(op, tol: float | None = None, *, dense_limit: int = DENSE_LIMIT, seed: int = 0):
    n = as_linear_operator(op).shape[0]
    if n <= dense_limit:
        w, v = np.linalg.eigh(to_dense(op))
        return float(w[0]), v[:, 0]
    value, vec, _ = lanczos_smallest(op, tol, seed=seed)
    return value, vec


def low_spectrum(op, threshold: float, *, dense_limit: int = DENSE_LIMIT, tol: float | None = None,
                 max_vectors: int = 256, seed: int = 0):
    """Eigenpairs below ``threshold`` plus the first eigenvalue above it.

    Returns ``(low_values, low_vectors, next_value)``; ``next_value`` is ``inf``
    when every eigenvalue lies below the threshold.
    """
    n = as_linear_operator(op).shape[0]
    if n <= dense_limit:
        w, v = np.linalg.eigh(to_dense(op))
        k = int(np.searchsorted(w, threshold, side="left"))
        nxt = float(w[k]) if k < n else np.inf
        return w[:k], v[:, :k], nxt
    values, vectors = [], []
    while len(vectors) < min(max_vectors, n):
        val, vec, _ = lanczos_smallest(op, tol, deflate=vectors or None, seed=seed + len(vectors))
        if val >= threshold:
            return np.array(values), np.column_stack(vectors) if vectors else np.zeros((n, 0)), val
        values.append(val)
        vectors.append(vec)
    if len(vectors) == n:
        return np.array(values), np.column_stack(vectors), np.inf
    raise SolverNoConvergence(
        "too many eigenvalues below threshold for the deflation budget",
        diagnostics={"found": len(vectors), "max_vectors": max_vectors},
    )
