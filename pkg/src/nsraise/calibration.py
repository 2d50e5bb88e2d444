"""Per-day estimation: shape grid search under OLS, CN check, ridge/raise re-fit."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import _kernels
from ._linalg import RANK_RTOL, as_matrix
from .basis import DesignMatrix, Model, ShapeParams, build_design_matrix
from .diagnostics import (
    CollinearityReport,
    collinearity_report,
    condition_number,
    scaled_eigenvalues,
    select_raise_variable,
)
from .errors import CalibrationError, ConfigurationError, NSRaiseError, UnmitigableCollinearityError
from .market_data import CurveSnapshot
from .regression import (
    UNRAISABLE_RTOL,
    FitResult,
    Method,
    auxiliary_residuals,
    ols_fit,
    raise_fit,
    relabel,
    ridge_fit,
)

log = logging.getLogger(__name__)

ALL_METHODS = (Method.OLS, Method.RIDGE, Method.RAISE)

# grid points whose SSE is within this band of the minimum count as tied
TIE_RTOL = 1e-10
TIE_ATOL = 1e-20


@dataclass(frozen=True)
class CalibrationConfig:
    model: Model = Model.NS
    grid_min: float = 0.05
    grid_max: float = 10.0
    grid_step: float = 0.05
    cn_threshold: float = 20.0
    k_tol: float = 1e-6
    k_max: float = 1e4
    methods: tuple[Method, ...] = ALL_METHODS
    rate_unit: str = "decimal"

    def __post_init__(self):
        object.__setattr__(self, "model", Model(self.model))
        object.__setattr__(self, "methods", tuple(Method(m) for m in self.methods))
        if not self.grid_min > 0:
            raise ConfigurationError("grid_min must be positive (loadings are undefined at lambda = 0)")
        if not self.grid_step > 0 or self.grid_max < self.grid_min:
            raise ConfigurationError("need grid_step > 0 and grid_max >= grid_min")
        if not self.cn_threshold > 1:
            raise ConfigurationError("cn_threshold must exceed 1")
        if not (self.k_tol > 0 and self.k_max > self.k_tol):
            raise ConfigurationError("need 0 < k_tol < k_max")
        if Method.OLS not in self.methods:
            raise ConfigurationError("OLS is always estimated; include it in methods")
        if self.rate_unit not in ("decimal", "percent"):
            raise ConfigurationError(f"unknown rate unit {self.rate_unit!r}")

    def grid(self) -> np.ndarray:
        count = int(np.floor((self.grid_max - self.grid_min) / self.grid_step + 1e-9)) + 1
        return np.round(self.grid_min + self.grid_step * np.arange(count), 12)


class FactorChoice(NamedTuple):
    k: float
    mitigated: bool


@dataclass(frozen=True)
class DayEstimate:
    date: object
    shape: ShapeParams | None
    fits: dict = field(default_factory=dict)
    report: CollinearityReport | None = None
    boundary: bool = False
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def long_rate(self) -> dict:
        return {m: f.long_rate for m, f in self.fits.items()}

    @property
    def short_rate(self) -> dict:
        return {m: f.short_rate for m, f in self.fits.items()}


@dataclass(frozen=True)
class EstimationSeries:
    config: CalibrationConfig
    days: list
    snapshots: list = field(repr=False, default_factory=list)

    @property
    def successful(self) -> list:
        return [d for d in self.days if d.ok]

    @property
    def failures(self) -> int:
        return sum(not d.ok for d in self.days)

    def mean_cn(self) -> dict:
        good = self.successful
        return {m: float(np.mean([d.fits[m].cn for d in good])) for m in self.config.methods} if good else {}

    def mean_k(self) -> dict:
        good = self.successful
        return {m: float(np.mean([d.fits[m].k for d in good])) for m in self.config.methods} if good else {}

    def mean_vif(self) -> np.ndarray:
        return np.mean([d.report.vif for d in self.successful], axis=0)

    def mean_cv(self) -> np.ndarray:
        return np.mean([d.report.cv for d in self.successful], axis=0)


# --- grid search ----------------------------------------------------------------


def shape_grid(config: CalibrationConfig) -> np.ndarray:
    """Grid of shapes as rows (lambda1,) or (lambda1, lambda2), lambda1 < lambda2 for SV."""
    g = config.grid()
    if config.model is Model.NS:
        return g[:, None]
    i, j = np.triu_indices(g.size, k=1)
    return np.column_stack([g[i], g[j]])


@lru_cache(maxsize=16)
def _grid_bases(maturities: tuple, model: Model, shapes_key: bytes, n_shapes: int):
    tau = np.asarray(maturities)
    shapes = np.frombuffer(shapes_key).reshape(n_shapes, -1)
    slope, curv = _kernels.slope_curvature(tau[None, :] / shapes[:, :1])
    cols = [np.ones_like(slope), slope, curv]
    if model is Model.SV:
        cols.append(_kernels.slope_curvature(tau[None, :] / shapes[:, 1:2])[1])
    stack = np.stack(cols, axis=-1)
    U, s, _ = np.linalg.svd(stack, full_matrices=False)
    valid = s[:, -1] > RANK_RTOL * s[:, 0]
    return np.ascontiguousarray(U), valid


def grid_sse(snapshot: CurveSnapshot, config: CalibrationConfig):
    """(shapes, sse) over the whole configured grid; rank-deficient points get ``inf``."""
    shapes = shape_grid(config)
    key = np.ascontiguousarray(shapes, dtype=np.float64)
    bases, valid = _grid_bases(tuple(snapshot.maturities.tolist()), config.model, key.tobytes(), len(key))
    return shapes, _kernels.sse_grid(bases, valid, snapshot.rates)


def argmin_with_ties(sse: np.ndarray, y: np.ndarray) -> int:
    """First index whose SSE is tied with the minimum (grid order breaks ties)."""
    best = np.min(sse)
    if not np.isfinite(best):
        raise CalibrationError("every grid point gives a rank-deficient design")
    band = best + TIE_RTOL * best + TIE_ATOL * float(y @ y)
    return int(np.flatnonzero(sse <= band)[0])


def _shape_from_row(model: Model, row) -> ShapeParams:
    return ShapeParams.ns(row[0]) if model is Model.NS else ShapeParams.sv(row[0], row[1])


def grid_search_shape(snapshot: CurveSnapshot, config: CalibrationConfig):
    """Shape with the lowest OLS SSE on the grid, and the OLS fit there."""
    if snapshot.n <= config.model.n_params:
        raise CalibrationError(f"{snapshot.n} points cannot identify a {config.model.value} curve")
    shapes, sse = grid_sse(snapshot, config)
    idx = argmin_with_ties(sse, snapshot.rates)
    shape = _shape_from_row(config.model, shapes[idx])
    X = build_design_matrix(snapshot.maturities, shape)
    return shape, ols_fit(X, snapshot.rates)


# --- k search -----------------------------------------------------------------


def smallest_factor(cn_of_k: Callable[[float], float], threshold: float, tol: float, k_max: float) -> FactorChoice:
    """Smallest k with ``cn_of_k(k) <= threshold`` by doubling then bisection.

    Assumes ``cn_of_k`` is non-increasing.  Returns ``(k_max, False)`` when the
    threshold is out of reach.
    """
    if cn_of_k(0.0) <= threshold:
        return FactorChoice(0.0, True)
    lo, hi = 0.0, min(1e-3, k_max)
    while cn_of_k(hi) > threshold:
        if hi >= k_max:
            return FactorChoice(float(k_max), False)
        lo, hi = hi, min(2.0 * hi, k_max)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if cn_of_k(mid) > threshold:
            lo = mid
        else:
            hi = mid
    return FactorChoice(hi, True)


def select_raise_factor(X, i: int, threshold: float = 20.0, tol: float = 1e-6, k_max: float = 1e4) -> FactorChoice:
    A = as_matrix(X)
    if condition_number(A) <= threshold:
        return FactorChoice(0.0, True)
    e = auxiliary_residuals(A, i)
    if np.linalg.norm(e) <= UNRAISABLE_RTOL * np.linalg.norm(A[:, i]):
        raise UnmitigableCollinearityError(f"column {i} is an exact combination of the others")
    work = A.copy()

    def cn(k):
        work[:, i] = A[:, i] + k * e
        return condition_number(work)

    return smallest_factor(cn, threshold, tol, k_max)


def select_ridge_factor(X, threshold: float = 20.0, tol: float = 1e-6, k_max: float = 1e4) -> FactorChoice:
    xi = scaled_eigenvalues(X)
    hi_eig, lo_eig = xi[0], xi[-1]

    def cn(k):
        if k == 0:
            return condition_number(X)
        return float(np.sqrt((hi_eig + k) / (lo_eig + k)))

    return smallest_factor(cn, threshold, tol, k_max)


# --- per day and panel ----------------------------------------------------------


def estimate_day(snapshot: CurveSnapshot, config: CalibrationConfig) -> DayEstimate:
    shape, ols = grid_search_shape(snapshot, config)
    X: DesignMatrix = build_design_matrix(snapshot.maturities, shape)
    report = collinearity_report(X)
    y = snapshot.rates
    fits = {Method.OLS: ols}
    if report.cn <= config.cn_threshold:
        for m in config.methods:
            if m is not Method.OLS:
                fits[m] = relabel(ols, m)
    else:
        if Method.RIDGE in config.methods:
            k, ok = select_ridge_factor(X, config.cn_threshold, config.k_tol, config.k_max)
            fit = ridge_fit(X, y, k)
            fits[Method.RIDGE] = fit if ok else _unmitigated(fit)
        if Method.RAISE in config.methods:
            i = select_raise_variable(X)
            k, ok = select_raise_factor(X, i, config.cn_threshold, config.k_tol, config.k_max)
            fit = raise_fit(X, y, i, k)
            fits[Method.RAISE] = fit if ok else _unmitigated(fit)
    boundary = max(shape.lambdas) >= config.grid()[-1]
    return DayEstimate(snapshot.date, shape, fits, report, bool(boundary))


def _unmitigated(fit: FitResult) -> FitResult:
    return replace(fit, mitigated=False)


def estimate_series(panel: Sequence[CurveSnapshot], config: CalibrationConfig) -> EstimationSeries:
    """Estimate every day; failing days are kept with an error marker."""
    if not panel:
        raise CalibrationError("empty panel")
    ordered = sorted(panel, key=lambda s: s.date)
    days = []
    for snap in ordered:
        try:
            days.append(estimate_day(snap, config))
        except NSRaiseError as exc:
            log.warning("estimation failed on %s: %s", snap.date, exc)
            days.append(DayEstimate(snap.date, None, error=f"{type(exc).__name__}: {exc}"))
    return EstimationSeries(config, days, ordered)
