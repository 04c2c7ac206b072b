"""Non-negative least squares with an unconstrained intercept.

Active-set solver after Lawson and Hanson. The intercept is removed by
centering, so only the slope coefficients carry the ``beta >= 0``
constraint.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from .exceptions import UnderdeterminedError


class CollinearColumnWarning(UserWarning):
    pass


@dataclass
class NNLSResult:
    intercept: float
    coef: np.ndarray
    r_squared: float
    ssr: float
    dropped: list = field(default_factory=list)
    n_iter: int = 0


def _independent_columns(A, rtol=1e-10):
    """Indices of columns kept when scanning left to right for rank growth."""
    keep = []
    scale = max(1.0, np.linalg.norm(A, ord=np.inf))
    for j in range(A.shape[1]):
        if np.linalg.norm(A[:, j]) <= rtol * scale:
            continue
        trial = keep + [j]
        s = np.linalg.svd(A[:, trial], compute_uv=False)
        if s[-1] > rtol * s[0]:
            keep = trial
    return keep


def lawson_hanson(A, b, tol=1e-10, max_iter=None):
    """Solve ``min ||A x - b||`` subject to ``x >= 0``.

    ``A`` must have full column rank. Returns ``(x, n_iter)``.
    """
    m, n = A.shape
    max_iter = 3 * n + 10 if max_iter is None else max_iter
    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    tol = tol * max(1.0, np.linalg.norm(A, ord=np.inf) * np.linalg.norm(b, ord=np.inf))
    w = A.T @ (b - A @ x)
    n_iter = 0
    while (~passive).any() and w[~passive].max() > tol:
        if n_iter >= max_iter:
            warnings.warn("NNLS reached the iteration limit", RuntimeWarning)
            break
        n_iter += 1
        candidates = np.where(~passive, w, -np.inf)
        passive[int(np.argmax(candidates))] = True
        while True:
            z = np.zeros(n)
            z[passive] = np.linalg.lstsq(A[:, passive], b, rcond=None)[0]
            if (z[passive] > 0).all():
                x = z
                break
            blocking = passive & (z <= 0)
            alpha = np.min(x[blocking] / (x[blocking] - z[blocking]))
            x = x + alpha * (z - x)
            passive &= x > 1e-15
            x[~passive] = 0.0
        w = A.T @ (b - A @ x)
    # final refit on the passive set makes the residual orthogonal to it
    if passive.any():
        x = np.zeros(n)
        x[passive] = np.linalg.lstsq(A[:, passive], b, rcond=None)[0]
    return x, n_iter


def nnls_fit(X, y, fit_intercept=True, tol=1e-10, warn=True) -> NNLSResult:
    """Least squares with non-negative slopes and a free intercept.

    Collinear columns are dropped (the later-indexed one loses) and get a
    coefficient of zero.

    Parameters
    ----------
    X : array_like, shape (n_rows, n_cols)
    y : array_like, shape (n_rows,)
    fit_intercept : bool
    tol : float
        Relative tolerance on the gradient test of the active-set loop.
    warn : bool
        Emit :class:`CollinearColumnWarning` when columns are dropped.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n_rows, n_cols = X.shape
    if y.shape != (n_rows,):
        raise ValueError(f"y has shape {y.shape}, expected ({n_rows},)")
    if n_rows < n_cols + int(fit_intercept):
        raise UnderdeterminedError(
            f"underdetermined: {n_rows} rows for {n_cols} columns"
            + (" plus intercept" if fit_intercept else ""))

    if fit_intercept:
        x_mean = X.mean(axis=0)
        y_mean = y.mean()
    else:
        x_mean = np.zeros(n_cols)
        y_mean = 0.0
    A = X - x_mean
    b = y - y_mean

    keep = _independent_columns(A)
    dropped = [j for j in range(n_cols) if j not in keep]
    if dropped and warn:
        warnings.warn(f"dropping collinear column(s) {dropped}", CollinearColumnWarning)

    coef = np.zeros(n_cols)
    n_iter = 0
    if keep:
        coef[keep], n_iter = lawson_hanson(A[:, keep], b, tol=tol)
    intercept = float(y_mean - x_mean @ coef) if fit_intercept else 0.0
    resid = y - intercept - X @ coef
    ssr = float(resid @ resid)
    sst = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - ssr / sst if sst > 0 else float(ssr <= 1e-24)
    return NNLSResult(intercept, coef, r2, ssr, dropped, n_iter)


def kkt_violation(X, y, result: NNLSResult, fit_intercept=True) -> float:
    """Largest violation of the optimality conditions at ``result``.

    For active coefficients the gradient must vanish; for zero coefficients
    it must not point into the feasible region. Dropped collinear columns
    are excluded.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=float)
    resid = y - result.intercept - X @ result.coef
    grad = X.T @ resid
    viol = [abs(resid.sum())] if fit_intercept else []
    for j, (g, c) in enumerate(zip(grad, result.coef)):
        if j in result.dropped:
            continue
        viol.append(abs(g) if c > 0 else max(g, 0.0))
    return float(max(viol, default=0.0))


class NNLSRegression(BaseEstimator, RegressorMixin):
    """Linear regression with non-negative slopes.

    Parameters
    ----------
    fit_intercept : bool, default=True
        Fit an unconstrained intercept.
    tol : float, default=1e-10
    """

    def __init__(self, fit_intercept=True, tol=1e-10):
        self.fit_intercept = fit_intercept
        self.tol = tol

    def fit(self, X, y):
        X, y = validate_data(self, X, y, y_numeric=True)
        res = nnls_fit(X, y, fit_intercept=self.fit_intercept, tol=self.tol)
        self.coef_ = res.coef
        self.intercept_ = res.intercept
        self.r_squared_ = res.r_squared
        self.dropped_ = res.dropped
        return self

    def predict(self, X):
        check_is_fitted(self)
        X = validate_data(self, X, reset=False)
        return X @ self.coef_ + self.intercept_
