"""Nelson-Siegel / Svensson term-structure estimation with OLS, ridge and raise
regression, collinearity diagnostics and out-of-sample evaluation."""

from ._kernels import BACKEND
from .basis import DesignMatrix, Model, ShapeParams, build_design_matrix, ns_loadings, spot_rate, sv_loadings
from .calibration import CalibrationConfig, DayEstimate, EstimationSeries, estimate_day, estimate_series
from .diagnostics import CollinearityReport, collinearity_report, condition_number, cv, vif
from .market_data import CurveSnapshot, Quote, bootstrap_zero_curve, build_panel, parse_quotes, swap_rate_from_curve
from .regression import FitResult, Method, ols_fit, raise_fit, ridge_fit

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CalibrationConfig",
    "CollinearityReport",
    "CurveSnapshot",
    "DayEstimate",
    "DesignMatrix",
    "EstimationSeries",
    "FitResult",
    "Method",
    "Model",
    "Quote",
    "ShapeParams",
    "bootstrap_zero_curve",
    "build_design_matrix",
    "build_panel",
    "collinearity_report",
    "condition_number",
    "cv",
    "estimate_day",
    "estimate_series",
    "ns_loadings",
    "ols_fit",
    "parse_quotes",
    "raise_fit",
    "ridge_fit",
    "spot_rate",
    "sv_loadings",
    "swap_rate_from_curve",
    "vif",
]
