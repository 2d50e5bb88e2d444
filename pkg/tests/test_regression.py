import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import MARKET_TAUS, random_design
from nsraise.basis import ShapeParams, build_design_matrix
from nsraise.errors import (
    DimensionError,
    DomainError,
    InsufficientDataError,
    SingularDesignError,
    UnsupportedOperationError,
)
from nsraise.regression import (
    Method,
    auxiliary_residuals,
    ols_fit,
    raise_fit,
    raise_matrix,
    relabel,
    ridge_fit,
)


def test_ols_matches_lstsq_and_classical_se(rng):
    X = random_design(rng, 21, 4)
    y = X @ [1.0, -0.5, 0.25, 2.0] + 0.1 * rng.standard_normal(21)
    fit = ols_fit(X, y)
    beta, res, _, _ = np.linalg.lstsq(X, y, rcond=None)
    np.testing.assert_allclose(fit.beta, beta, rtol=1e-12)
    np.testing.assert_allclose(fit.sse, res[0], rtol=1e-12)
    sigma2 = res[0] / (21 - 4)
    se = np.sqrt(np.diag(sigma2 * np.linalg.inv(X.T @ X)))
    np.testing.assert_allclose(fit.std_errors, se, rtol=1e-9)
    assert fit.method is Method.OLS and fit.k == 0


def test_ols_exact_fit(rng):
    X = random_design(rng, 21, 3)
    beta = np.array([0.02, -0.01, 0.005])
    fit = ols_fit(X, X @ beta)
    np.testing.assert_allclose(fit.beta, beta, atol=1e-14)
    assert fit.sse < 1e-28


def test_ols_singular_reports_columns(rng):
    X = random_design(rng, 21, 3)
    X = np.column_stack([X, 2 * X[:, 1] - X[:, 2]])
    with pytest.raises(SingularDesignError) as info:
        ols_fit(X, rng.standard_normal(21))
    assert set(info.value.columns) >= {1, 2, 3}


def test_ols_dimension_checks(rng):
    X = random_design(rng, 21, 3)
    with pytest.raises(DimensionError):
        ols_fit(X, np.ones(20))
    with pytest.raises(InsufficientDataError):
        ols_fit(X[:3], np.ones(3))


def test_results_are_read_only(rng):
    X = random_design(rng)
    fit = ols_fit(X, rng.standard_normal(21))
    with pytest.raises(ValueError):
        fit.beta[0] = 1.0


def _ridge_oracle(X, y, k):
    """Ridge via the explicit normal equations on centred unit-length regressors."""
    means = X[:, 1:].mean(axis=0)
    Zc = X[:, 1:] - means
    norms = np.linalg.norm(Zc, axis=0)
    Z = Zc / norms
    b = np.linalg.solve(Z.T @ Z + k * np.eye(Z.shape[1]), Z.T @ (y - y.mean()))
    slopes = b / norms
    return np.r_[y.mean() - slopes @ means, slopes]


@pytest.mark.parametrize("k", [0.0, 1e-4, 0.1, 3.0])
def test_ridge_matches_normal_equations(rng, k):
    X = random_design(rng, 21, 4)
    y = rng.standard_normal(21)
    fit = ridge_fit(X, y, k)
    np.testing.assert_allclose(fit.beta, _ridge_oracle(X, y, k), rtol=1e-9, atol=1e-12)
    assert fit.intercept_reconstructed and fit.k == k


def test_ridge_zero_equals_ols(rng):
    X = random_design(rng, 21, 3)
    y = rng.standard_normal(21)
    np.testing.assert_allclose(ridge_fit(X, y, 0.0).beta, ols_fit(X, y).beta, rtol=1e-10)
    np.testing.assert_allclose(ridge_fit(X, y, 0.0).std_errors, ols_fit(X, y).std_errors, rtol=1e-8)


def test_ridge_sse_grows_with_k(rng):
    X = random_design(rng, 21, 4)
    y = rng.standard_normal(21)
    sse = [ridge_fit(X, y, k).sse for k in (0.0, 0.01, 0.1, 1.0, 10.0)]
    assert np.all(np.diff(sse) >= -1e-14)


def test_ridge_large_k_shrinks_to_mean(rng):
    X = random_design(rng, 21, 3)
    y = rng.standard_normal(21)
    fit = ridge_fit(X, y, 1e12)
    assert np.all(np.abs(fit.beta[1:]) < 1e-9)
    assert abs(fit.beta[0] - y.mean()) < 1e-9


def test_ridge_rejects_negative_k(rng):
    with pytest.raises(DomainError):
        ridge_fit(random_design(rng), np.zeros(21), -1.0)


def test_auxiliary_residuals_orthogonal(rng):
    X = random_design(rng, 21, 4)
    for i in (1, 2, 3):
        e = auxiliary_residuals(X, i)
        others = np.delete(X, i, axis=1)
        assert np.max(np.abs(others.T @ e)) < 1e-12


def test_intercept_never_raised(rng):
    with pytest.raises(UnsupportedOperationError):
        raise_matrix(random_design(rng), 0, 1.0)


def test_raise_matrix_unraisable():
    X = build_design_matrix(MARKET_TAUS, ShapeParams.sv(1.0, 1.0))
    rt = raise_matrix(X.matrix, 3, 5.0)
    assert rt.unraisable
    np.testing.assert_array_equal(rt.raised_matrix, X.matrix)


def test_raise_identities_on_nss_design(rng):
    X = build_design_matrix(MARKET_TAUS, ShapeParams.sv(1.2, 1.6))
    y = X.matrix @ [0.03, -0.02, 0.01, -0.01] + 1e-4 * rng.standard_normal(21)
    base = ols_fit(X, y)
    for k in (0.5, 2.0, 10.0):
        for i in (1, 2, 3):
            fit = raise_fit(X, y, i, k)
            assert abs(fit.sse - base.sse) <= 1e-10 * base.sse
            assert abs(fit.beta[i] * (1 + k) - base.beta[i]) <= 1e-8 * max(1.0, abs(base.beta[i]))
            assert fit.raised_index == i and fit.method is Method.RAISE
            assert fit.shape == X.shape


def test_raise_reduces_condition_number():
    X = build_design_matrix(MARKET_TAUS, ShapeParams.sv(1.2, 1.6))
    cns = [raise_fit(X, np.linspace(0, 1, 21), 3, k).cn for k in (0.0, 1.0, 5.0, 25.0)]
    assert np.all(np.diff(cns) < 0)


def test_relabel_keeps_numbers(rng):
    X = random_design(rng)
    fit = ols_fit(X, rng.standard_normal(21))
    r = relabel(fit, Method.RIDGE)
    assert r.method is Method.RIDGE and r.beta is fit.beta


@given(k=st.floats(0.0, 100.0), seed=st.integers(0, 10_000), p=st.sampled_from([3, 4]))
@settings(max_examples=150, deadline=None)
def test_raise_invariants_property(k, seed, p):
    r = np.random.default_rng(seed)
    X = random_design(r, 21, p)
    y = r.standard_normal(21)
    base = ols_fit(X, y)
    i = int(r.integers(1, p))
    fit = raise_fit(X, y, i, k)
    np.testing.assert_allclose(fit.fitted, base.fitted, rtol=0, atol=1e-9 * max(1.0, np.abs(y).max()))
    assert abs(fit.sse - base.sse) <= 1e-10 * base.sse
    np.testing.assert_allclose(fit.beta[i] * (1 + k), base.beta[i], rtol=1e-8, atol=1e-10)
