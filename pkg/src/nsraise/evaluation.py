"""Panel metrics: descriptive statistics, in-sample MSE, 30-year MAE and
Newey-West t-tests on pairwise MAE differences.

Reported rates are in percent, so MSE is in percent squared.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from .calibration import EstimationSeries
from .errors import DegenerateTestError, DimensionError, MetricUnavailableError
from .market_data import HOLDOUT_YEARS, Compounding, swap_rate_from_curve
from .regression import Method

TABLE1_MATURITIES = (
    ("1 month", 1 / 12),
    ("3 months", 3 / 12),
    ("6 months", 6 / 12),
    ("1 year", 1.0),
    ("2 years", 2.0),
    ("5 years", 5.0),
    ("10 years", 10.0),
)

# pairwise tests: name -> (minuend, subtrahend) of absolute errors
PAIRWISE = {
    "alpha1": (Method.OLS, Method.RAISE),
    "alpha2": (Method.RIDGE, Method.RAISE),
    "alpha3": (Method.OLS, Method.RIDGE),
}


def percent_factor(rate_unit: str) -> float:
    return 100.0 if rate_unit == "decimal" else 1.0


@dataclass(frozen=True)
class DescriptiveRow:
    label: str
    maturity: float
    mean: float
    std: float
    min: float
    max: float
    count: int


def descriptive_stats(panel, maturities=TABLE1_MATURITIES, rate_unit: str = "decimal") -> list[DescriptiveRow]:
    if not panel:
        raise DimensionError("empty panel")
    scale = percent_factor(rate_unit)
    rows = []
    for label, tau in maturities:
        vals = []
        for snap in panel:
            hit = np.flatnonzero(np.isclose(snap.maturities, tau, rtol=0, atol=1e-9))
            if hit.size:
                vals.append(snap.rates[hit[0]] * scale)
        if not vals:
            warnings.warn(f"maturity {label} absent from panel", stacklevel=2)
            continue
        v = np.asarray(vals)
        std = float(v.std(ddof=1)) if v.size > 1 else float("nan")
        rows.append(DescriptiveRow(label, float(tau), float(v.mean()), std, float(v.min()), float(v.max()), v.size))
    return rows


def in_sample_mse(series: EstimationSeries, method, scale: float = 1.0) -> float:
    """Mean over days of the per-day SSE, multiplied by ``scale``."""
    sse = [d.fits[Method(method)].sse for d in series.successful]
    if not sse:
        raise MetricUnavailableError("no successfully estimated days")
    return float(np.mean(sse)) * scale


def holdout_errors(series: EstimationSeries, method, compounding=Compounding.ANNUAL):
    """Dates and signed errors (actual - model) of the 30-year par swap rate."""
    method = Method(method)
    holdout = {s.date: s.holdout_30y for s in series.snapshots}
    dates, errors = [], []
    for d in series.successful:
        actual = holdout.get(d.date)
        if actual is None:
            continue
        model = swap_rate_from_curve(d.fits[method], d.shape, HOLDOUT_YEARS, compounding)
        dates.append(d.date)
        errors.append(actual - model)
    return dates, np.asarray(errors, dtype=np.float64)


def out_of_sample_mae(series: EstimationSeries, method, scale: float = 1.0,
                      compounding=Compounding.ANNUAL) -> float:
    _, err = holdout_errors(series, method, compounding)
    if err.size == 0:
        raise MetricUnavailableError("no days with a 30-year holdout quote")
    return float(np.mean(np.abs(err))) * scale


# --- Newey-West -----------------------------------------------------------------


def newey_west_lags(m: int) -> int:
    return int(math.floor(4.0 * (m / 100.0) ** (2.0 / 9.0)))


def hac_variance(d, lags: int) -> float:
    """HAC variance of the sample mean of ``d`` with Bartlett weights.

    Long-run variance ``gamma_0 + 2 sum_l (1 - l/(L+1)) gamma_l`` (autocovariances
    with divisor m), divided by ``m - 1``: the regression-on-a-constant form
    with the m/(m-1) degrees-of-freedom correction.
    """
    d = np.asarray(d, dtype=np.float64)
    m = d.size
    u = d - d.mean()
    s = u @ u / m
    for lag in range(1, min(lags, m - 1) + 1):
        w = 1.0 - lag / (lags + 1.0)
        s += 2.0 * w * (u[lag:] @ u[:-lag]) / m
    return float(s / (m - 1))


@dataclass(frozen=True)
class NeweyWestResult:
    alpha: float
    t_stat: float
    std_error: float
    lags: int
    m: int

    @property
    def p_value(self) -> float:
        return float(2.0 * stats.norm.sf(abs(self.t_stat)))


def newey_west_ttest(diff, lags: int | None = None) -> NeweyWestResult:
    """t-test that the mean of ``diff`` is zero, with Newey-West standard error."""
    d = np.asarray(diff, dtype=np.float64)
    m = d.size
    if m < 2:
        raise DimensionError("need at least two observations")
    L = newey_west_lags(m) if lags is None else int(lags)
    if L < 0:
        raise DimensionError("lags must be non-negative")
    var = hac_variance(d, L)
    alpha = float(d.mean())
    scale = max(float(np.max(np.abs(d))), 1e-300)
    if not var > (1e-15 * scale) ** 2:
        raise DegenerateTestError("difference series has no sampling variability")
    se = math.sqrt(var)
    return NeweyWestResult(alpha, alpha / se, se, L, m)


@dataclass(frozen=True)
class PairwiseTest:
    name: str
    alpha: float
    t_stat: float
    std_error: float
    lags: int
    m: int
    p_value: float
    significant: bool
    note: str = ""


def compare_methods(series: EstimationSeries, lags: int | None = None, scale: float = 1.0,
                    compounding=Compounding.ANNUAL) -> dict[str, PairwiseTest]:
    """The three pairwise MAE tests on per-day absolute-error differences."""
    abs_err = {}
    for m in (Method.OLS, Method.RIDGE, Method.RAISE):
        _, e = holdout_errors(series, m, compounding)
        abs_err[m] = np.abs(e) * scale
    m_days = abs_err[Method.OLS].size
    if m_days < 2:
        raise MetricUnavailableError("need at least two days with a 30-year holdout")
    out = {}
    for name, (a, b) in PAIRWISE.items():
        diff = abs_err[a] - abs_err[b]
        try:
            r = newey_west_ttest(diff, lags)
        except DegenerateTestError:
            L = newey_west_lags(m_days) if lags is None else int(lags)
            out[name] = PairwiseTest(name, float(diff.mean()), float("nan"), 0.0, L, m_days, 1.0, False,
                                     "no difference")
            continue
        out[name] = PairwiseTest(name, r.alpha, r.t_stat, r.std_error, r.lags, r.m, r.p_value,
                                 bool(r.p_value < 0.05))
    return out


# --- report -------------------------------------------------------------------


@dataclass
class EvaluationReport:
    descriptive: list = field(default_factory=list)
    cn: dict = field(default_factory=dict)
    k: dict = field(default_factory=dict)
    vif_cv: dict = field(default_factory=dict)
    mse: dict = field(default_factory=dict)
    mae: dict = field(default_factory=dict)
    ttests: dict = field(default_factory=dict)
    m: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "units": {"rates": "percent", "mse": "percent^2", "mae": "percent"},
            "table1_descriptive": [asdict(r) for r in self.descriptive],
            "table2_cn_mean": self.cn,
            "k_mean": self.k,
            "table3_vif_cv_mean": self.vif_cv,
            "table4_mse": self.mse,
            "table5_mae": self.mae,
            "table6_ttests": {mod: {n: asdict(t) for n, t in tests.items()} for mod, tests in self.ttests.items()},
            "days": self.m,
            "failed_days": self.failures,
            "notes": self.notes,
        }

    def long_rows(self):
        """Flattened (table, row, column, value) records for CSV export."""
        d = self.to_dict()
        for r in d["table1_descriptive"]:
            for col in ("mean", "std", "min", "max", "count"):
                yield "table1_descriptive", r["label"], col, r[col]
        for key in ("table2_cn_mean", "k_mean", "table4_mse", "table5_mae"):
            for model, per in d[key].items():
                for method, v in per.items():
                    yield key, model, method, v
        for model, cols in d["table3_vif_cv_mean"].items():
            for col, vals in cols.items():
                for stat, v in vals.items():
                    yield "table3_vif_cv_mean", f"{model}:{col}", stat, v
        for model, tests in d["table6_ttests"].items():
            for name, t in tests.items():
                for col in ("alpha", "t_stat", "std_error", "lags", "m", "p_value", "significant"):
                    yield "table6_ttests", f"{model}:{name}", col, t[col]


def _clean(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def build_report(panel, series_by_model: dict, lags: int | None = None,
                 compounding=Compounding.ANNUAL) -> EvaluationReport:
    rep = EvaluationReport()
    rate_unit = next(iter(series_by_model.values())).config.rate_unit if series_by_model else "decimal"
    pf = percent_factor(rate_unit)
    rep.descriptive = descriptive_stats(panel, rate_unit=rate_unit)
    for model, series in series_by_model.items():
        key = getattr(model, "value", str(model))
        methods = series.config.methods
        rep.m[key] = len(series.successful)
        rep.failures[key] = series.failures
        if not series.successful:
            rep.notes.append(f"{key}: no successfully estimated days")
            continue
        rep.cn[key] = {m.value: v for m, v in series.mean_cn().items()}
        rep.k[key] = {m.value: v for m, v in series.mean_k().items() if m is not Method.OLS}
        vifs, cvs = series.mean_vif(), series.mean_cv()
        rep.vif_cv[key] = {f"X{j + 1}": {"cv": float(cvs[j]), "vif": float(vifs[j])} for j in range(vifs.size)}
        rep.mse[key] = {m.value: in_sample_mse(series, m, pf * pf) for m in methods}
        try:
            rep.mae[key] = {m.value: out_of_sample_mae(series, m, pf, compounding) for m in methods}
        except MetricUnavailableError:
            rep.notes.append(f"{key}: MAE unavailable (no 30-year holdout quotes)")
            continue
        if all(m in methods for m in (Method.OLS, Method.RIDGE, Method.RAISE)):
            try:
                rep.ttests[key] = compare_methods(series, lags, pf, compounding)
            except MetricUnavailableError as exc:
                rep.notes.append(f"{key}: t-tests unavailable ({exc})")
    return rep


def write_report(rep: EvaluationReport, out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    jpath = out_dir / "report_tables.json"
    cpath = out_dir / "report_tables.csv"
    with open(jpath, "w", encoding="utf-8") as fh:
        json.dump(_sanitize(rep.to_dict()), fh, indent=1, allow_nan=False)
        fh.write("\n")
    with open(cpath, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["table", "row", "column", "value"])
        for table, row, col, v in rep.long_rows():
            w.writerow([table, row, col, _fmt(v)])
    return [jpath, cpath]


def _sanitize(obj):
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_sanitize(v) for v in obj]
    return _clean(obj)


def _fmt(v):
    if isinstance(v, bool) or v is None:
        return "" if v is None else str(v).lower()
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else ""
    return str(v)
