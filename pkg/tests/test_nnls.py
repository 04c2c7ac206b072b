import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import nnls as scipy_nnls

from mediaopinion.exceptions import UnderdeterminedError
from mediaopinion.nnls import (CollinearColumnWarning, NNLSRegression, kkt_violation,
                               nnls_fit)
from oracles import grid_min_ssr


def test_exact_fit_without_intercept():
    res = nnls_fit([[1.0], [2.0]], [1.0, 2.0], fit_intercept=False)
    assert res.coef[0] == pytest.approx(1.0)
    assert res.r_squared == pytest.approx(1.0)


def test_anticorrelated_column_is_zero():
    X = np.array([[3.0], [2.0], [1.0]])
    y = np.array([1.0, 2.0, 3.0])
    res = nnls_fit(X, y)
    assert res.coef[0] == 0.0
    assert res.intercept == pytest.approx(2.0)
    assert res.r_squared == pytest.approx(0.0)
    assert res.ssr == pytest.approx(grid_min_ssr(X, y), abs=1e-12)
    assert kkt_violation(X, y, res) < 1e-8


def test_underdetermined():
    with pytest.raises(UnderdeterminedError, match="underdetermined"):
        nnls_fit(np.ones((2, 2)), [1.0, 2.0])


def test_collinear_later_column_dropped():
    rng = np.random.default_rng(0)
    x = rng.uniform(size=10)
    X = np.column_stack([x, 2 * x + 1, rng.uniform(size=10)])
    y = 3 * x + rng.normal(0, 0.01, 10)
    with pytest.warns(CollinearColumnWarning):
        res = nnls_fit(X, y)
    assert res.dropped == [1]
    assert res.coef[1] == 0.0


def test_matches_scipy_on_random_instances():
    rng = np.random.default_rng(1)
    for _ in range(300):
        p = rng.integers(1, 6)
        n = rng.integers(p + 1, 20)
        X, y = rng.normal(size=(n, p)), rng.normal(size=n)
        res = nnls_fit(X, y)
        Xc, yc = X - X.mean(0), y - y.mean()
        _, rnorm = scipy_nnls(Xc, yc)
        assert res.ssr == pytest.approx(rnorm ** 2, abs=1e-10)
        assert (res.coef >= 0).all()
        assert kkt_violation(X, y, res) < 1e-8


def test_grid_oracle_small():
    rng = np.random.default_rng(2)
    X = rng.uniform(size=(8, 2))
    y = X @ [1.3, 0.0] - 0.5 * X[:, 1] + rng.normal(0, 0.05, 8)
    res = nnls_fit(X, y)
    grid = grid_min_ssr(X, y)
    assert res.ssr <= grid + 1e-12
    assert grid - res.ssr < 1e-3


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(3, 15), st.integers(1, 4))
def test_kkt_property(seed, n, p):
    rng = np.random.default_rng(seed)
    if n < p + 1:
        return
    X = rng.uniform(size=(n, p))
    y = X @ rng.normal(size=p) + rng.normal(0, 0.1, n)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CollinearColumnWarning)
        res = nnls_fit(X, y)
    assert (res.coef >= 0).all()
    assert kkt_violation(X, y, res) < 1e-8


def test_estimator_api():
    from sklearn.base import clone

    rng = np.random.default_rng(3)
    X = rng.uniform(size=(30, 3))
    y = X @ [2.0, 0.0, 1.0] + 0.5
    est = NNLSRegression().fit(X, y)
    np.testing.assert_allclose(est.coef_, [2.0, 0.0, 1.0], atol=1e-10)
    assert est.intercept_ == pytest.approx(0.5)
    assert est.score(X, y) == pytest.approx(1.0)
    assert clone(est).get_params() == {"fit_intercept": True, "tol": 1e-10}
    with pytest.raises(ValueError):
        est.predict(X[:, :2])
