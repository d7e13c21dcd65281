import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from didcits.ols import DesignMatrix, EmptyDataError, fit_wls, linear_combination, vcov_estimate


def _simple_regression(x, y):
    n = len(x)
    sx, sy = sum(x), sum(y)
    sxx = sum(v * v for v in x)
    sxy = sum(a * b for a, b in zip(x, y))
    slope = (n * sxy - sx * sy) / (n * sxx - sx * sx)
    return (sy - slope * sx) / n, slope


def test_identity_design():
    fit = fit_wls(np.eye(3), [2.0, 5.0, 7.0])
    np.testing.assert_allclose(fit.coefficients, [2, 5, 7], atol=1e-14)


def test_intercept_only_is_mean():
    fit = fit_wls(np.ones((3, 1)), [1.0, 2.0, 3.0])
    assert fit.coefficients[0] == pytest.approx(2.0, abs=1e-14)


def test_simple_regression_matches_closed_form():
    x, y = [0.0, 1.0, 2.0], [1.0, 3.0, 5.0]
    a, b = _simple_regression(x, y)
    assert (a, b) == (1.0, 2.0)
    fit = fit_wls(np.column_stack([np.ones(3), x]), y)
    np.testing.assert_allclose(fit.coefficients, [a, b], atol=1e-13)


def test_empty_data_raises():
    with pytest.raises(EmptyDataError):
        fit_wls(np.empty((0, 2)), [])


def test_zero_column_dropped_by_name():
    X = DesignMatrix(np.column_stack([np.ones(4), np.zeros(4), np.arange(4.0)]), ("a", "dead", "b"))
    with pytest.warns(RuntimeWarning, match="dead"):
        fit = fit_wls(X, [1.0, 2.0, 2.5, 4.0])
    assert fit.dropped == ("dead",)
    assert fit.rank == 2
    assert fit.coef("dead") == 0.0
    assert np.all(fit.vcov[1] == 0.0)


def test_collinear_column_dropped():
    x = np.arange(6.0)
    X = DesignMatrix(np.column_stack([np.ones(6), x, 2 * x + 1]), ("c", "x", "x2"))
    with pytest.warns(RuntimeWarning):
        fit = fit_wls(X, x**2)
    assert fit.rank == 2 and len(fit.dropped) == 1


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 8), st.integers(0, 40))
def test_matches_normal_equations(seed, p, extra):
    rng = np.random.default_rng(seed)
    n = min(50, p + 2 + extra)
    X = rng.normal(size=(n, p))
    y = rng.normal(size=n)
    w = rng.uniform(0.2, 3.0, size=n)
    fit = fit_wls(X, y, w)
    brute = np.linalg.solve(X.T @ (w[:, None] * X), X.T @ (w * y))
    np.testing.assert_allclose(fit.coefficients, brute, rtol=1e-9, atol=1e-9 * np.abs(brute).max())


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_weighted_residual_orthogonality(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(30, 5)) * rng.uniform(0.1, 100, size=5)
    y = rng.normal(size=30) * 10
    w = rng.uniform(0.1, 5.0, size=30)
    fit = fit_wls(X, y, w)
    score = X.T @ (w * fit.residuals)
    scale = np.abs(X).max(axis=0) * np.abs(y).max() * w.sum()
    assert np.all(np.abs(score) <= 1e-8 * scale)


def test_weight_rescaling():
    rng = np.random.default_rng(1)
    X = np.column_stack([np.ones(40), rng.normal(size=40)])
    y = X @ [1.0, 2.0] + rng.normal(size=40)
    w = rng.uniform(0.5, 2.0, size=40)
    a = fit_wls(X, y, w, se_type="hc1")
    b = fit_wls(X, y, 7.5 * w, se_type="hc1")
    np.testing.assert_allclose(a.coefficients, b.coefficients, rtol=1e-12)
    np.testing.assert_allclose(a.vcov, b.vcov, rtol=1e-10)
    c = fit_wls(X, y, w, se_type="classical")
    d = fit_wls(X, y, 7.5 * w, se_type="classical")
    np.testing.assert_allclose(c.coefficients, d.coefficients, rtol=1e-12)


def test_duplicated_half_weight_rows_reproduce_fit():
    rng = np.random.default_rng(2)
    X = np.column_stack([np.ones(25), rng.normal(size=(25, 2))])
    y = rng.normal(size=25)
    base = fit_wls(X, y)
    dup = fit_wls(np.vstack([X, X]), np.concatenate([y, y]), np.full(50, 0.5))
    np.testing.assert_allclose(dup.coefficients, base.coefficients, rtol=1e-12, atol=1e-14)


def test_hc1_close_to_classical_under_homoskedasticity():
    rng = np.random.default_rng(3)
    n = 500
    X = np.column_stack([np.ones(n), rng.normal(size=n), rng.uniform(size=n)])
    y = X @ [1.0, -0.5, 2.0] + rng.normal(size=n)
    hc1 = fit_wls(X, y, se_type="hc1").se
    classical = fit_wls(X, y, se_type="classical").se
    assert np.all(np.abs(hc1 / classical - 1) < 0.25)


def test_classical_vcov_formula():
    rng = np.random.default_rng(4)
    X = np.column_stack([np.ones(20), rng.normal(size=20)])
    y = rng.normal(size=20)
    w = rng.uniform(0.5, 2, size=20)
    fit = fit_wls(X, y, w, se_type="classical")
    r = y - X @ fit.coefficients
    s2 = np.sum(w * r**2) / (20 - 2)
    np.testing.assert_allclose(fit.vcov, s2 * np.linalg.inv(X.T @ (w[:, None] * X)), rtol=1e-10)


def test_hc1_and_cluster_vcov_formulas():
    rng = np.random.default_rng(5)
    n, G = 60, 12
    X = np.column_stack([np.ones(n), rng.normal(size=n)])
    y = rng.normal(size=n)
    w = rng.uniform(0.5, 2, size=n)
    ids = np.repeat(np.arange(G), n // G)
    fit = fit_wls(X, y, w, se_type="hc1")
    r = y - X @ fit.coefficients
    bread = np.linalg.inv(X.T @ (w[:, None] * X))
    u = X * (w * r)[:, None]
    np.testing.assert_allclose(fit.vcov, n / (n - 2) * bread @ u.T @ u @ bread, rtol=1e-10)

    cl = fit_wls(X, y, w, se_type="cluster", cluster_ids=ids)
    sums = np.array([u[ids == g].sum(axis=0) for g in range(G)])
    expected = G / (G - 1) * (n - 1) / (n - 2) * bread @ sums.T @ sums @ bread
    np.testing.assert_allclose(cl.vcov, expected, rtol=1e-10)
    assert cl.n_clusters == G


def test_single_cluster_rejected():
    X = np.column_stack([np.ones(5), np.arange(5.0)])
    with pytest.raises(ValueError, match="at least 2 clusters"):
        fit_wls(X, np.arange(5.0) ** 2, se_type="cluster", cluster_ids=["a"] * 5)


def test_vcov_estimate_recomputes_for_other_types():
    rng = np.random.default_rng(6)
    X = np.column_stack([np.ones(30), rng.normal(size=30)])
    y = rng.normal(size=30)
    fit = fit_wls(X, y, se_type="hc1")
    classical = vcov_estimate(fit, X, y, None, "classical")
    np.testing.assert_allclose(classical, fit_wls(X, y, se_type="classical").vcov, rtol=1e-12)
    vcov = fit.vcov
    assert np.allclose(vcov, vcov.T)
    assert np.linalg.eigvalsh(vcov).min() > -1e-12


def test_linear_combination_selector_and_zero():
    rng = np.random.default_rng(7)
    X = np.column_stack([np.ones(30), rng.normal(size=30)])
    fit = fit_wls(X, rng.normal(size=30))
    one = linear_combination(fit, [0.0, 1.0])
    assert one.point == fit.coefficients[1]
    assert one.se == pytest.approx(fit.se[1], rel=1e-14)
    assert one.ci_high - one.ci_low == pytest.approx(2 * 1.959963984540054 * one.se, rel=1e-12)
    zero = linear_combination(fit, [0.0, 0.0])
    assert zero.point == 0.0 and zero.se == 0.0


def test_contrast_of_symmetric_coefficients_is_zero():
    # two dummies with mirror-image data: their coefficients must coincide
    y = np.array([1.0, 2.0, 4.0, 1.0, 2.0, 4.0])
    d1 = np.array([1, 1, 1, 0, 0, 0], float)
    d2 = 1 - d1
    x = np.array([0.0, 1.0, 2.0, 0.0, 1.0, 2.0])
    fit = fit_wls(DesignMatrix(np.column_stack([d1, d2, x]), ("a", "b", "x")), y)
    # brute force: each group's intercept is mean(y - slope*x) within group
    slope = np.polyfit(x, y, 1)[0]
    assert fit.coef("a") == pytest.approx(np.mean((y - slope * x)[:3]))
    est = linear_combination(fit, {"a": 1.0, "b": -1.0})
    assert abs(est.point) < 1e-12
