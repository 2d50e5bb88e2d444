"""OLS, ridge and raise estimators for ``y = X beta + u``.

Column 0 of every design is the intercept.  All least-squares solves go
through a QR factorisation; normal equations are never formed.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from ._linalg import as_matrix, lstsq_qr, project_out, r_inverse
from .basis import ShapeParams
from .diagnostics import condition_number, ridge_condition_number
from .errors import DimensionError, DomainError, InsufficientDataError, UnsupportedOperationError

# ||e_i|| / ||X_i|| below which a column counts as an exact combination of the others
UNRAISABLE_RTOL = 1e-10


class Method(str, Enum):
    OLS = "OLS"
    RIDGE = "Ridge"
    RAISE = "Raise"


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FitResult:
    method: Method
    beta: np.ndarray
    std_errors: np.ndarray
    sse: float
    sigma2: float
    fitted: np.ndarray
    k: float = 0.0
    raised_index: int | None = None
    cn: float = float("nan")
    shape: ShapeParams | None = None
    # ridge only: the intercept is rebuilt from the centred fit
    intercept_reconstructed: bool = False
    mitigated: bool = True

    @property
    def long_rate(self) -> float:
        return float(self.beta[0])

    @property
    def short_rate(self) -> float:
        return float(self.beta[0] + self.beta[1])


@dataclass(frozen=True)
class RaiseTransform:
    index: int
    residuals: np.ndarray
    k: float
    raised_matrix: np.ndarray
    original: np.ndarray = field(repr=False)
    delta: np.ndarray = field(repr=False)
    unraisable: bool = False


def _prepare(X, y):
    A = as_matrix(X)
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1 or y.shape[0] != A.shape[0]:
        raise DimensionError(f"y has shape {y.shape}, design has {A.shape[0]} rows")
    n, p = A.shape
    if n <= p:
        raise InsufficientDataError(f"{n} observations for {p} coefficients")
    return A, y, getattr(X, "shape", None)


def ols_fit(X, y) -> FitResult:
    A, y, shape = _prepare(X, y)
    n, p = A.shape
    beta, resid, R = lstsq_qr(A, y)
    sse = float(resid @ resid)
    sigma2 = sse / (n - p)
    Rinv = r_inverse(R)
    cov = sigma2 * (Rinv @ Rinv.T)
    return FitResult(
        method=Method.OLS,
        beta=_frozen(beta),
        std_errors=_frozen(np.sqrt(np.clip(np.diag(cov), 0.0, None))),
        sse=sse,
        sigma2=sigma2,
        fitted=_frozen(A @ beta),
        cn=condition_number(A),
        shape=shape if isinstance(shape, ShapeParams) else None,
    )


def ridge_fit(X, y, k: float) -> FitResult:
    """Ridge on centred, unit-length regressors; slopes and intercept mapped back.

    Standard errors use the sandwich ``sigma2 A^-1 Z'Z A^-1`` with
    ``A = Z'Z + kI`` on the standardized scale.
    """
    if k < 0:
        raise DomainError(f"ridge factor must be non-negative, got {k}")
    A, y, shape = _prepare(X, y)
    n, p = A.shape
    if not np.allclose(A[:, 0], 1.0):
        raise DimensionError("ridge_fit expects column 0 to be the intercept")
    means = A[:, 1:].mean(axis=0)
    Zc = A[:, 1:] - means
    norms = np.linalg.norm(Zc, axis=0)
    if np.any(norms == 0):
        raise DimensionError("a regressor is constant; cannot standardize")
    Z = Zc / norms
    ybar = y.mean()
    yc = y - ybar
    q = p - 1
    aug = np.vstack([Z, np.sqrt(k) * np.eye(q)])
    b_z, _, R = lstsq_qr(aug, np.concatenate([yc, np.zeros(q)]))
    slopes = b_z / norms
    beta = np.concatenate([[ybar - slopes @ means], slopes])
    fitted = A @ beta
    resid = y - fitted
    sse = float(resid @ resid)
    sigma2 = sse / (n - p)
    Rinv = r_inverse(R)
    Ainv = Rinv @ Rinv.T
    cov_z = sigma2 * Ainv @ (Z.T @ Z) @ Ainv
    cov_s = cov_z / np.outer(norms, norms)
    var0 = sigma2 / n + means @ cov_s @ means
    se = np.sqrt(np.clip(np.concatenate([[var0], np.diag(cov_s)]), 0.0, None))
    return FitResult(
        method=Method.RIDGE,
        beta=_frozen(beta),
        std_errors=_frozen(se),
        sse=sse,
        sigma2=sigma2,
        fitted=_frozen(fitted),
        k=float(k),
        cn=ridge_condition_number(A, k),
        shape=shape if isinstance(shape, ShapeParams) else None,
        intercept_reconstructed=True,
    )


def _aux(A: np.ndarray, i: int):
    if i == 0:
        raise UnsupportedOperationError("the intercept column is never raised")
    if not 0 < i < A.shape[1]:
        raise DimensionError(f"column index {i} out of range for {A.shape[1]} columns")
    return project_out(np.delete(A, i, axis=1), A[:, i])


def auxiliary_residuals(X, i: int) -> np.ndarray:
    """Residuals of regressing column ``i`` on all other columns."""
    e, _ = _aux(as_matrix(X), i)
    return e


def raise_matrix(X, i: int, k: float) -> RaiseTransform:
    """Replace column ``i`` by ``X_i + k e_i``."""
    if k < 0:
        raise DomainError(f"raising factor must be non-negative, got {k}")
    A = as_matrix(X)
    e, delta = _aux(A, i)
    unraisable = np.linalg.norm(e) <= UNRAISABLE_RTOL * np.linalg.norm(A[:, i])
    if unraisable:
        e = np.zeros_like(e)
    raised = A.copy()
    if k != 0:
        raised[:, i] = A[:, i] + k * e
    return RaiseTransform(
        index=i,
        residuals=_frozen(e),
        k=float(k),
        raised_matrix=_frozen(raised),
        original=_frozen(A),
        delta=_frozen(delta),
        unraisable=bool(unraisable),
    )


def raise_fit(X, y, i: int, k: float) -> FitResult:
    """OLS on the raised design.  Fitted values and SSE equal the OLS ones."""
    rt = raise_matrix(X, i, k)
    fit = ols_fit(rt.raised_matrix, y)
    shape = getattr(X, "shape", None)
    return replace(
        fit,
        method=Method.RAISE,
        k=float(k),
        raised_index=i,
        shape=shape if isinstance(shape, ShapeParams) else None,
    )


def relabel(fit: FitResult, method: Method) -> FitResult:
    """The same fit reported under another method tag (used when no mitigation is needed)."""
    return replace(fit, method=Method(method))
