import datetime as dt

import numpy as np
import pytest

from conftest import MARKET_TAUS
from nsraise.basis import Model, ShapeParams, build_design_matrix, curve_rates
from nsraise.calibration import (
    CalibrationConfig,
    argmin_with_ties,
    estimate_day,
    estimate_series,
    grid_search_shape,
    select_raise_factor,
    select_ridge_factor,
    shape_grid,
    smallest_factor,
)
from nsraise.diagnostics import condition_number, ridge_condition_number
from nsraise.errors import CalibrationError, ConfigurationError, UnmitigableCollinearityError
from nsraise.market_data import CurveSnapshot
from nsraise.regression import Method, raise_matrix

D0 = dt.date(2013, 5, 6)


def snapshot(beta, shape, noise=0.0, rng=None, date=D0):
    y = curve_rates(beta, shape, MARKET_TAUS)
    if noise:
        y = y + noise * rng.standard_normal(y.size)
    return CurveSnapshot(date, MARKET_TAUS, y, None)


def test_default_grid():
    cfg = CalibrationConfig()
    g = cfg.grid()
    assert g.size == 200 and g[0] == 0.05 and g[-1] == 10.0
    np.testing.assert_allclose(np.diff(g), 0.05, atol=1e-12)
    assert shape_grid(CalibrationConfig(model=Model.SV)).shape == (19_900, 2)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"grid_min": 0.0},
        {"grid_step": 0.0},
        {"grid_max": 0.01},
        {"cn_threshold": 1.0},
        {"k_tol": 0.0},
        {"methods": ("Ridge", "Raise")},
        {"rate_unit": "bp"},
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(ConfigurationError):
        CalibrationConfig(**kwargs)


def test_argmin_ties_take_first():
    y = np.ones(4)
    assert argmin_with_ties(np.array([3.0, 1.0, 1.0 + 1e-14, 0.99999999999999]), y) == 1
    assert argmin_with_ties(np.array([2.0, 0.5, 0.3]), y) == 2
    with pytest.raises(CalibrationError):
        argmin_with_ties(np.array([np.inf, np.inf]), y)


@pytest.mark.parametrize("lam", [0.35, 1.5, 4.2])
def test_grid_search_recovers_on_grid_lambda(lam):
    beta = (0.03, -0.02, 0.015)
    shape, fit = grid_search_shape(snapshot(beta, ShapeParams.ns(lam)), CalibrationConfig())
    assert shape.lambda1 == pytest.approx(lam, abs=1e-12)
    np.testing.assert_allclose(fit.beta, beta, atol=1e-10)


def test_grid_search_sv_recovers():
    beta = (0.03, -0.02, 0.015, -0.01)
    cfg = CalibrationConfig(model=Model.SV, grid_min=0.25, grid_max=5.0, grid_step=0.25)
    shape, fit = grid_search_shape(snapshot(beta, ShapeParams.sv(0.75, 3.5)), cfg)
    assert shape.lambdas == pytest.approx((0.75, 3.5))
    np.testing.assert_allclose(fit.beta, beta, atol=1e-9)


def test_grid_search_rejects_short_snapshot():
    snap = CurveSnapshot(D0, [1.0, 2.0, 3.0], [0.01, 0.02, 0.03])
    with pytest.raises(CalibrationError):
        grid_search_shape(snap, CalibrationConfig())


def test_smallest_factor_bisects_known_function():
    # cn(k) = 100 / (1 + k): threshold 20 reached at k = 4
    k, ok = smallest_factor(lambda k: 100 / (1 + k), 20.0, 1e-8, 1e4)
    assert ok and k == pytest.approx(4.0, abs=1e-7) and 100 / (1 + k) <= 20.0
    assert smallest_factor(lambda k: 5.0, 20.0, 1e-6, 1e4) == (0.0, True)
    assert smallest_factor(lambda k: 50.0, 20.0, 1e-6, 1e4) == (1e4, False)


def test_select_factors_on_nss_design():
    X = build_design_matrix(MARKET_TAUS, ShapeParams.sv(1.0, 1.4))
    assert condition_number(X) > 20
    k, ok = select_ridge_factor(X)
    assert ok and ridge_condition_number(X, k) <= 20 + 1e-9
    assert ridge_condition_number(X, max(k - 1e-5, 0)) > 20
    k, ok = select_raise_factor(X, 3)
    assert ok
    assert condition_number(raise_matrix(X, 3, k).raised_matrix) <= 20 + 1e-9
    assert condition_number(raise_matrix(X, 3, k - 1e-5).raised_matrix) > 20


def test_select_raise_factor_unraisable():
    X = build_design_matrix(MARKET_TAUS, ShapeParams.sv(1.0, 1.0))
    with pytest.raises(UnmitigableCollinearityError):
        select_raise_factor(X.matrix, 3)


def test_estimate_day_relabels_when_well_conditioned():
    cfg = CalibrationConfig(cn_threshold=1e6)
    day = estimate_day(snapshot((0.03, -0.02, 0.01), ShapeParams.ns(1.5)), cfg)
    assert day.ok
    for m in (Method.RIDGE, Method.RAISE):
        assert day.fits[m].method is m and day.fits[m].k == 0
        np.testing.assert_array_equal(day.fits[m].beta, day.fits[Method.OLS].beta)


def test_estimate_day_mitigates(rng):
    cfg = CalibrationConfig(model=Model.SV, grid_min=0.1, grid_max=3.0, grid_step=0.1, cn_threshold=8.0)
    day = estimate_day(snapshot((0.03, -0.02, 0.01, -0.01), ShapeParams.sv(0.5, 0.7), 1e-4, rng), cfg)
    assert day.report.cn > 8
    ridge, rais = day.fits[Method.RIDGE], day.fits[Method.RAISE]
    assert ridge.k > 0 and ridge.cn <= 8 + 1e-6
    if rais.mitigated:
        assert rais.k > 0 and rais.cn <= 8 + 1e-6
    assert rais.sse == pytest.approx(day.fits[Method.OLS].sse, rel=1e-10)
    assert ridge.sse >= day.fits[Method.OLS].sse


def test_boundary_flag():
    # a pure level curve has no curvature information: every lambda ties, first wins
    day = estimate_day(snapshot((0.03, -0.02, 0.0), ShapeParams.ns(10.0)), CalibrationConfig())
    assert day.boundary and day.shape.lambda1 == 10.0


def test_estimate_series_sorts_and_keeps_failures():
    good = snapshot((0.03, -0.02, 0.01), ShapeParams.ns(1.5), date=D0 + dt.timedelta(days=1))
    short = CurveSnapshot(D0, [1.0, 2.0, 3.0], [0.01, 0.02, 0.03])
    series = estimate_series([good, short], CalibrationConfig())
    assert [d.date for d in series.days] == [short.date, good.date]
    assert series.failures == 1 and "CalibrationError" in series.days[0].error
    assert len(series.successful) == 1
    assert set(series.mean_cn()) == {Method.OLS, Method.RIDGE, Method.RAISE}
    with pytest.raises(CalibrationError):
        estimate_series([], CalibrationConfig())
