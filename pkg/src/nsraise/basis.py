"""Nelson-Siegel and Svensson factor loadings and design matrices.

Maturities are in years throughout; a monthly quote of ``m`` months is
``m / 12`` years.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels
from .errors import ConfigurationError, DimensionError, DomainError, InsufficientDataError


class Model(str, Enum):
    NS = "NS"
    SV = "SV"

    @property
    def n_params(self) -> int:
        return 3 if self is Model.NS else 4


@dataclass(frozen=True)
class ShapeParams:
    """Shape (decay) parameters: one for NS, two for SV."""

    model: Model
    lambda1: float
    lambda2: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "model", Model(self.model))
        if not (np.isfinite(self.lambda1) and self.lambda1 > 0):
            raise DomainError(f"lambda1 must be positive, got {self.lambda1}")
        if self.model is Model.SV:
            if self.lambda2 is None:
                raise ConfigurationError("SV shape requires lambda2")
            if not self.lambda2 > 0:
                raise DomainError(f"lambda2 must be positive, got {self.lambda2}")
        elif self.lambda2 is not None:
            raise ConfigurationError("NS shape takes a single lambda")

    @classmethod
    def ns(cls, lam: float) -> ShapeParams:
        return cls(Model.NS, float(lam))

    @classmethod
    def sv(cls, lam1: float, lam2: float) -> ShapeParams:
        return cls(Model.SV, float(lam1), float(lam2))

    @property
    def p(self) -> int:
        return self.model.n_params

    @property
    def lambdas(self) -> tuple[float, ...]:
        if self.model is Model.NS:
            return (self.lambda1,)
        return (self.lambda1, self.lambda2)


def _check_tau(tau):
    tau = np.asarray(tau, dtype=np.float64)
    if not np.all(np.isfinite(tau)) or np.any(tau <= 0):
        raise DomainError("maturities must be finite and strictly positive")
    return tau


def ns_loadings(tau, lam):
    """Level, slope and curvature loadings.

    Returns an array of shape ``tau.shape + (3,)``.
    """
    tau = _check_tau(tau)
    if not (np.isfinite(lam) and lam > 0):
        raise DomainError(f"lambda must be positive, got {lam}")
    slope, curv = _kernels.slope_curvature(tau / lam)
    return np.stack([np.ones_like(tau), slope, curv], axis=-1)


def sv_loadings(tau, shape: ShapeParams):
    """Svensson loadings: the NS triple at ``lambda1`` plus a second curvature at ``lambda2``."""
    if shape.model is not Model.SV or shape.lambda2 is None:
        raise ConfigurationError("sv_loadings needs an SV shape with lambda2")
    base = ns_loadings(tau, shape.lambda1)
    tau = np.asarray(tau, dtype=np.float64)
    _, curv2 = _kernels.slope_curvature(tau / shape.lambda2)
    return np.concatenate([base, curv2[..., None]], axis=-1)


def loadings(tau, shape: ShapeParams):
    if shape.model is Model.NS:
        return ns_loadings(tau, shape.lambda1)
    return sv_loadings(tau, shape)


@dataclass(frozen=True)
class DesignMatrix:
    """Loadings matrix for a maturity vector: one row per maturity."""

    matrix: np.ndarray
    maturities: np.ndarray
    shape: ShapeParams

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def p(self) -> int:
        return self.matrix.shape[1]

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)


def build_design_matrix(maturities, shape: ShapeParams) -> DesignMatrix:
    tau = _check_tau(np.atleast_1d(np.asarray(maturities, dtype=np.float64)))
    if tau.ndim != 1:
        raise DimensionError("maturities must be one-dimensional")
    if np.any(np.diff(tau) < 0):
        raise DomainError("maturities must be given in ascending order")
    p = shape.p
    if tau.size <= p or np.unique(tau).size <= p:
        raise InsufficientDataError(
            f"need more than {p} distinct maturities for a {shape.model.value} fit, got {tau.size}"
        )
    if np.unique(tau).size < tau.size:
        warnings.warn("duplicate maturities in design matrix", stacklevel=2)
    X = loadings(tau, shape)
    X.setflags(write=False)
    tau.setflags(write=False)
    return DesignMatrix(X, tau, shape)


def spot_rate(beta, load):
    beta = np.asarray(beta, dtype=np.float64)
    load = np.asarray(load, dtype=np.float64)
    if beta.shape[-1] != load.shape[-1]:
        raise DimensionError(f"coefficient length {beta.shape[-1]} != loading length {load.shape[-1]}")
    return load @ beta


def curve_rates(beta, shape: ShapeParams, tau):
    """Model spot rates at maturities ``tau`` for coefficients ``beta``."""
    return spot_rate(beta, loadings(tau, shape))
