import csv
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from nsraise.basis import Model
from nsraise.calibration import CalibrationConfig, estimate_series
from nsraise.errors import DegenerateTestError, DimensionError
from nsraise.evaluation import (
    build_report,
    compare_methods,
    descriptive_stats,
    hac_variance,
    holdout_errors,
    in_sample_mse,
    newey_west_lags,
    newey_west_ttest,
    out_of_sample_mae,
    write_report,
)
from nsraise.market_data import build_panel
from nsraise.regression import Method
from nsraise.synth import generate_panel


def bartlett_oracle(d, L):
    """Direct long-run variance: weighted double sum over all pairs."""
    u = d - d.mean()
    m = d.size
    total = 0.0
    for s in range(m):
        for t in range(m):
            lag = abs(s - t)
            if lag <= L:
                total += (1 - lag / (L + 1)) * u[s] * u[t]
    return total / m / (m - 1)


@pytest.fixture(scope="module")
def small_series():
    panel = generate_panel(40, seed=3, noise_bp=1.0)
    snaps, _ = build_panel(panel.quotes)
    return snaps, estimate_series(snaps, CalibrationConfig())


def test_lag_rule():
    assert newey_west_lags(100) == 4
    assert newey_west_lags(2719) == math.floor(4 * 27.19 ** (2 / 9))
    assert newey_west_lags(10) == 2


def test_hac_matches_double_sum(rng):
    d = rng.standard_normal(60).cumsum() * 0.1
    for L in (0, 1, 3, 8):
        assert hac_variance(d, L) == pytest.approx(bartlett_oracle(d, L), rel=1e-12)


def test_zero_lag_equals_one_sample_t(rng):
    d = 0.3 + rng.standard_normal(50)
    r = newey_west_ttest(d, lags=0)
    ref = stats.ttest_1samp(d, 0.0)
    assert r.t_stat == pytest.approx(ref.statistic, rel=1e-12)
    assert r.lags == 0 and r.m == 50


def test_ttest_errors():
    with pytest.raises(DegenerateTestError):
        newey_west_ttest(np.full(10, 0.2))
    with pytest.raises(DimensionError):
        newey_west_ttest([1.0])
    with pytest.raises(DimensionError):
        newey_west_ttest([1.0, 2.0, 3.0], lags=-1)


def test_p_value_is_two_sided_normal(rng):
    r = newey_west_ttest(rng.standard_normal(30) + 0.1, lags=2)
    assert r.p_value == pytest.approx(2 * stats.norm.sf(abs(r.t_stat)))


@given(st.lists(st.floats(-1, 1), min_size=3, max_size=40), st.integers(0, 6))
@settings(max_examples=100, deadline=None)
def test_hac_nonnegative(vals, L):
    d = np.asarray(vals)
    assert hac_variance(d, L) >= -1e-15


def test_descriptive_stats(small_series):
    snaps, _ = small_series
    rows = descriptive_stats(snaps)
    assert [r.label for r in rows][:2] == ["1 month", "3 months"]
    one_m = np.array([s.rates[0] for s in snaps]) * 100
    assert rows[0].mean == pytest.approx(one_m.mean()) and rows[0].count == len(snaps)
    assert rows[0].std == pytest.approx(one_m.std(ddof=1))


def test_metrics_and_pairwise_identity(small_series):
    _, series = small_series
    mse_ols = in_sample_mse(series, Method.OLS)
    assert in_sample_mse(series, Method.RAISE) == pytest.approx(mse_ols, rel=1e-10)
    assert in_sample_mse(series, Method.RIDGE) >= mse_ols
    dates, err = holdout_errors(series, Method.OLS)
    assert len(dates) == err.size == len(series.successful)
    assert out_of_sample_mae(series, Method.OLS) == pytest.approx(np.abs(err).mean())
    tests = compare_methods(series, lags=3)
    for t in tests.values():
        assert t.lags == 3 and t.m == err.size
    assert tests["alpha3"].alpha == pytest.approx(tests["alpha1"].alpha - tests["alpha2"].alpha, abs=1e-12)


def test_report_written(tmp_path, small_series):
    snaps, series = small_series
    rep = build_report(snaps, {Model.NS: series})
    paths = write_report(rep, tmp_path)
    data = json.loads(paths[0].read_text())
    for key in ("table1_descriptive", "table2_cn_mean", "table3_vif_cv_mean", "table4_mse",
                "table5_mae", "table6_ttests", "k_mean"):
        assert key in data
    assert set(data["table4_mse"]["NS"]) == {"OLS", "Ridge", "Raise"}
    with open(paths[1], newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["table", "row", "column", "value"]
    assert {r[0] for r in rows[1:]} >= {"table1_descriptive", "table4_mse", "table6_ttests"}
