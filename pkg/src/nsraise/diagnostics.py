"""Collinearity diagnostics: condition numbers, VIF and CV.

Condition numbers are computed on the unit-length scaled design (every
column, intercept included, divided by its Euclidean norm).  Eigenvalues of
the scaled cross-product are taken as squared singular values of the scaled
matrix rather than from the cross-product itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING

import numpy as np

from ._linalg import RANK_RTOL, as_matrix, project_out
from .errors import DegenerateColumnError, DimensionError, DomainError, SingularDesignError

if TYPE_CHECKING:
    from .regression import RaiseTransform

MODERATE_CN = 20.0
STRONG_CN = 30.0
VIF_THRESHOLD = 10.0
CV_THRESHOLD = 0.1002
VIF_TIE_RTOL = 1e-6


class Severity(str, Enum):
    NONE = "None"
    MODERATE = "Moderate"
    STRONG = "Strong"

    @classmethod
    def from_cn(cls, cn: float) -> Severity:
        if cn < MODERATE_CN:
            return cls.NONE
        if cn <= STRONG_CN:
            return cls.MODERATE
        return cls.STRONG


@dataclass(frozen=True)
class CollinearityReport:
    cn: float
    vif: np.ndarray
    cv: np.ndarray
    xi_max: float
    xi_min: float
    severity: Severity


def unit_length_scale(X) -> np.ndarray:
    A = as_matrix(X)
    norms = np.linalg.norm(A, axis=0)
    if np.any(norms == 0):
        raise DegenerateColumnError(f"zero column(s) {np.flatnonzero(norms == 0).tolist()}")
    return A / norms


def scaled_eigenvalues(X) -> np.ndarray:
    """Eigenvalues of the unit-length cross-product, descending."""
    s = np.linalg.svd(unit_length_scale(X), compute_uv=False)
    return s * s


def _cn_from_singular(s: np.ndarray) -> float:
    if s[-1] <= RANK_RTOL * s[0]:
        return np.inf
    return float(s[0] / s[-1])


def condition_number(X) -> float:
    """sqrt(xi_max / xi_min) of the unit-length scaled design; ``inf`` when rank deficient."""
    s = np.linalg.svd(unit_length_scale(X), compute_uv=False)
    return _cn_from_singular(s)


def ridge_condition_number(X, k: float) -> float:
    """Condition number after adding ``k`` to the diagonal of the unit-length cross-product."""
    if k < 0:
        raise DomainError(f"ridge factor must be non-negative, got {k}")
    xi = scaled_eigenvalues(X)
    if k == 0:
        return condition_number(X)
    return float(np.sqrt((xi[0] + k) / (xi[-1] + k)))


def raise_condition_number(rt: RaiseTransform) -> float:
    return condition_number(rt.raised_matrix)


def column_cv(v) -> float:
    """Coefficient of variation with the sample (n-1) standard deviation."""
    v = np.asarray(v, dtype=np.float64)
    if v.size < 2:
        raise DimensionError("CV needs at least two observations")
    mean = v.mean()
    std = v.std(ddof=1)
    if std == 0.0:
        return 0.0
    if abs(mean) <= 1e-14 * np.abs(v).max():
        return np.inf
    return float(std / abs(mean))


def cv(X) -> np.ndarray:
    """CV of each non-intercept column."""
    A = as_matrix(X)
    return np.array([column_cv(A[:, j]) for j in range(1, A.shape[1])])


def _aux_vif(A: np.ndarray, j: int) -> float:
    col = A[:, j]
    others = np.delete(A, j, axis=1)
    sst = float(np.sum((col - col.mean()) ** 2))
    try:
        resid, _ = project_out(others, col)
    except SingularDesignError:
        return np.inf
    ssr = float(resid @ resid)
    if sst == 0.0 or ssr <= 1e-24 * max(sst, float(col @ col)):
        return np.inf
    return sst / ssr


def vif(X) -> np.ndarray:
    """Variance inflation factor of each non-intercept column.

    ``VIF_j = 1 / (1 - R_j^2)`` where ``R_j^2`` comes from regressing column
    ``j`` on every other column, the intercept among them.
    """
    A = as_matrix(X)
    if A.shape[0] <= A.shape[1]:
        raise DimensionError("VIF needs more rows than columns")
    return np.array([_aux_vif(A, j) for j in range(1, A.shape[1])])


def collinearity_report(X) -> CollinearityReport:
    s = np.linalg.svd(unit_length_scale(X), compute_uv=False)
    cn = _cn_from_singular(s)
    return CollinearityReport(
        cn=cn,
        vif=vif(X),
        cv=cv(X),
        xi_max=float(s[0] ** 2),
        xi_min=float(s[-1] ** 2),
        severity=Severity.from_cn(cn),
    )


def choose_raise_column(vifs, cvs) -> int:
    """Design column to raise given per-regressor VIF and CV.

    Highest VIF wins; VIFs equal within a relative 1e-6 are tie-broken by
    the lowest CV.  Returned index counts the intercept as column 0.
    """
    vifs = np.asarray(vifs, dtype=np.float64)
    cvs = np.asarray(cvs, dtype=np.float64)
    top = vifs.max()
    if np.isinf(top):
        tied = np.flatnonzero(np.isinf(vifs))
    else:
        tied = np.flatnonzero(vifs >= top * (1.0 - VIF_TIE_RTOL))
    best = tied[np.argmin(cvs[tied])]
    return int(best) + 1


def select_raise_variable(X) -> int:
    A = as_matrix(X)
    if A.shape[1] < 3:
        raise DimensionError("need at least two non-intercept columns to choose one to raise")
    return choose_raise_column(vif(A), cv(A))
