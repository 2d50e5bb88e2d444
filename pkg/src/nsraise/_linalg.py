from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DimensionError, SingularDesignError

# smallest/largest singular value ratio below which a matrix is rank deficient
RANK_RTOL = 1e-10


def as_matrix(X) -> np.ndarray:
    A = np.asarray(getattr(X, "matrix", X), dtype=np.float64)
    if A.ndim != 2:
        raise DimensionError(f"expected a 2-D design, got shape {A.shape}")
    return A


def dependent_columns(A: np.ndarray) -> tuple[int, ...]:
    """Columns participating in the weakest linear dependence of ``A``."""
    norms = np.linalg.norm(A, axis=0)
    norms[norms == 0] = 1.0
    _, s, vt = np.linalg.svd(A / norms, full_matrices=False)
    v = vt[-1]
    return tuple(int(j) for j in np.flatnonzero(np.abs(v) > 1e-6 * np.abs(v).max()))


def qr_full_rank(A: np.ndarray):
    """Reduced QR of ``A`` after a scale-relative rank check."""
    Q, R = np.linalg.qr(A)
    s = np.linalg.svd(R, compute_uv=False)
    if s.size == 0 or s[-1] <= RANK_RTOL * s[0]:
        cols = dependent_columns(A)
        raise SingularDesignError(f"design is rank deficient (columns {list(cols)})", cols)
    return Q, R


def lstsq_qr(A: np.ndarray, y: np.ndarray):
    """Least-squares solution, residual vector and R factor via QR."""
    Q, R = qr_full_rank(A)
    beta = solve_triangular(R, Q.T @ y)
    resid = y - Q @ (Q.T @ y)
    return beta, resid, R


def project_out(A: np.ndarray, v: np.ndarray):
    """Residual of ``v`` after projection onto span(A), and the coefficients."""
    Q, R = qr_full_rank(A)
    c = Q.T @ v
    resid = v - Q @ c
    # second pass keeps the residual orthogonal when v is nearly in span(A)
    c2 = Q.T @ resid
    resid = resid - Q @ c2
    coef = solve_triangular(R, c + c2)
    return resid, coef


def r_inverse(R: np.ndarray) -> np.ndarray:
    return solve_triangular(R, np.eye(R.shape[0]))
