"""Sparse lagged regression of opinion on signed media-sentiment fractions.

Each topic contributes at most one predictor, chosen among its lags
``0..max_lag`` and the two reverse-coded signs, with a non-negative
coefficient. Topics enter greedily, one per step, which yields a nested
sequence of models.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import DataError
from .nnls import CollinearColumnWarning, nnls_fit
from .topics import SIGNS, TOPICS, Topic
from .validation import check_max_lag, check_max_topics, check_opinion, check_panel

TIE_TOL = 1e-12


@dataclass(frozen=True, order=True)
class CandidatePredictor:
    topic: Topic
    lag: int
    sign: str

    @property
    def tie_key(self):
        """Preference among equal-r² candidates: smaller lag, topic order, positive first."""
        return (self.lag, self.topic.order, SIGNS.index(self.sign))

    @property
    def label(self) -> str:
        lag = "t" if self.lag == 0 else f"t-{self.lag}"
        return f"F[{self.topic.value},{lag},{self.sign}]"

    def to_dict(self):
        return {"topic": self.topic.value, "lag": self.lag, "sign": self.sign}


def candidate_predictors(max_lag=5, min_lag=0):
    return [
        CandidatePredictor(topic, lag, sign)
        for topic in TOPICS
        for lag in range(min_lag, max_lag + 1)
        for sign in SIGNS
    ]


@dataclass
class DesignMatrix:
    years: list
    columns: list
    values: np.ndarray
    y: np.ndarray

    def column_index(self, predictor) -> int:
        return self.columns.index(predictor)


def build_design(panel, opinion, max_lag=5, min_lag=0) -> DesignMatrix:
    """Lagged design matrix over years with observed opinion and full lag history.

    Years whose opinion is missing, or for which any lag ``0..max_lag`` has
    no fraction, are dropped.
    """
    panel = check_panel(panel)
    opinion = check_opinion(opinion)
    check_max_lag(max_lag)
    have = set(panel.index)
    years = [
        int(t) for t in opinion.index
        if all(t - lag in have for lag in range(min_lag, max_lag + 1))
    ]
    columns = candidate_predictors(max_lag, min_lag)
    values = np.empty((len(years), len(columns)))
    for j, c in enumerate(columns):
        col = panel[(c.topic.value, c.sign)]
        values[:, j] = [col.loc[t - c.lag] for t in years]
    return DesignMatrix(years, columns, values, opinion.loc[years].to_numpy(dtype=float))


def greedy_group_select(X, y, groups, keys, max_groups, fit_intercept=True):
    """Forward selection adding one column from a fresh group per step.

    At each step every column of every unused group is refit jointly with
    the incumbent columns by non-negative least squares; the column with the
    highest r² joins. Candidates within ``TIE_TOL`` of the best r² are
    resolved by the smallest ``keys`` entry.

    Returns
    -------
    list of (list of int, NNLSResult)
        Selected column indices and the fit after each step.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    groups = list(groups)
    keys = list(keys)
    selected, used, steps = [], set(), []
    for _ in range(min(max_groups, len(set(groups)))):
        trials = []
        for j in range(X.shape[1]):
            if groups[j] in used:
                continue
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", CollinearColumnWarning)
                res = nnls_fit(X[:, selected + [j]], y, fit_intercept=fit_intercept)
            trials.append((res.r_squared, j, res))
        if not trials:
            break
        top = max(r2 for r2, _, _ in trials)
        _, j, res = min(
            (t for t in trials if t[0] >= top - TIE_TOL), key=lambda t: keys[t[1]])
        selected = selected + [j]
        used.add(groups[j])
        steps.append((list(selected), res))
    return steps


@dataclass
class SparseLagModel:
    intercept: float
    terms: list  # [(CandidatePredictor, coefficient)]
    r_squared: float
    fitted_years: list

    @property
    def topics(self):
        return [p.topic for p, _ in self.terms]

    def to_dict(self) -> dict:
        return {
            "intercept": self.intercept,
            "terms": [dict(p.to_dict(), coefficient=c) for p, c in self.terms],
            "r_squared": self.r_squared,
            "fitted_years": list(self.fitted_years),
        }

    @classmethod
    def from_dict(cls, d) -> "SparseLagModel":
        terms = [
            (CandidatePredictor(Topic.parse(t["topic"]), int(t["lag"]), t["sign"]),
             float(t["coefficient"]))
            for t in d["terms"]
        ]
        return cls(float(d["intercept"]), terms, float(d["r_squared"]),
                   [int(y) for y in d["fitted_years"]])

    def check_constraints(self):
        if any(c < 0 for _, c in self.terms):
            raise DataError("negative coefficient in sparse lag model")
        topics = self.topics
        if len(topics) != len(set(topics)):
            raise DataError("more than one term for a topic")


def evaluate_model(model: SparseLagModel, series, year: int) -> float:
    """Linear prediction ``intercept + sum(beta * signed_fraction)`` for ``year``."""
    if isinstance(series, pd.DataFrame):
        panel = series
    else:
        from .series import signed_panel

        panel = signed_panel(list(series)) if series else None
    value = model.intercept
    for pred, coef in model.terms:
        source = year - pred.lag
        key = (pred.topic.value, pred.sign)
        if panel is None or source not in panel.index or key not in panel.columns:
            raise DataError(f"no fraction for topic {pred.topic.value} in year {source}")
        value += coef * float(panel.loc[source, key])
    return value


def predict_model(model: SparseLagModel, panel) -> pd.Series:
    """Predictions for all years whose lagged fractions are available.

    Includes years past the end of ``panel`` when every term is lagged.
    """
    panel = check_panel(panel)
    lags = [p.lag for p, _ in model.terms]
    have = set(panel.index)
    last = max(have) + min(lags, default=0)
    years = [t for t in range(min(have), last + 1) if all(t - lag in have for lag in lags)]
    return pd.Series({t: evaluate_model(model, panel, t) for t in years}, name="predicted",
                     dtype=float)


class SparseLagRegressor(BaseEstimator, RegressorMixin):
    """Greedy nested sparse lagged regressor.

    ``fit`` takes a year-indexed panel of signed fractions (see
    :func:`mediaopinion.series.signed_panel`) or a list of
    ``TopicYearSeries``, and an opinion series indexed by year.

    Parameters
    ----------
    max_lag : int, default=5
    max_topics : int, default=8
        Number of greedy steps, hence of nested models.
    min_lag : int, default=0
        Smallest admitted lag; 0 allows same-year fractions.
    fit_intercept : bool, default=True

    Attributes
    ----------
    models_ : list of SparseLagModel
        ``models_[m]`` uses ``m + 1`` topics.
    design_ : DesignMatrix
    coef_, intercept_ : coefficients of the largest model.
    """

    def __init__(self, max_lag=5, max_topics=8, min_lag=0, fit_intercept=True):
        self.max_lag = max_lag
        self.max_topics = max_topics
        self.min_lag = min_lag
        self.fit_intercept = fit_intercept

    def fit(self, X, y):
        check_max_lag(self.max_lag)
        check_max_topics(self.max_topics)
        if not 0 <= self.min_lag <= self.max_lag:
            raise ValueError("min_lag must lie in 0..max_lag")
        design = build_design(X, y, self.max_lag, self.min_lag)
        steps = greedy_group_select(
            design.values, design.y,
            groups=[c.topic for c in design.columns],
            keys=[c.tie_key for c in design.columns],
            max_groups=self.max_topics,
            fit_intercept=self.fit_intercept,
        )
        self.design_ = design
        self.models_ = []
        for cols, res in steps:
            terms = [(design.columns[j], float(res.coef[i])) for i, j in enumerate(cols)]
            model = SparseLagModel(float(res.intercept), terms, float(res.r_squared),
                                   list(design.years))
            model.check_constraints()
            self.models_.append(model)
        last = self.models_[-1]
        self.intercept_ = last.intercept
        self.coef_ = np.array([c for _, c in last.terms])
        self.r_squared_ = last.r_squared
        return self

    def model(self, n_topics=None) -> SparseLagModel:
        check_is_fitted(self)
        if n_topics is None:
            return self.models_[-1]
        return self.models_[n_topics - 1]

    def predict(self, X, n_topics=None) -> pd.Series:
        """Predicted opinion for every year of ``X`` with the needed lag history."""
        check_is_fitted(self)
        return predict_model(self.model(n_topics), X)

    def score(self, X, y, n_topics=None):
        """r² of the chosen model on the years of ``y`` it can predict."""
        y = check_opinion(y)
        pred = self.predict(X, n_topics)
        common = [t for t in y.index if t in pred.index]
        resid = y.loc[common] - pred.loc[common]
        sst = ((y.loc[common] - y.loc[common].mean()) ** 2).sum()
        return float(1 - (resid ** 2).sum() / sst)


def nested_table(models) -> pd.DataFrame:
    """Coefficients of nested models laid out one column per model size."""
    order = []
    for m in models:
        for p, _ in m.terms:
            if p not in order:
                order.append(p)
    cols = [f"{i + 1} topic" + ("s" if i else "") for i in range(len(models))]
    rows = [p.label for p in order] + ["Intercept", "Explained variance"]
    data = {}
    for col, m in zip(cols, models):
        cells = dict.fromkeys(rows, "")
        for p, c in m.terms:
            cells[p.label] = f"{c:.3f}"
        cells["Intercept"] = f"{m.intercept:.3f}"
        cells["Explained variance"] = f"{m.r_squared:.3f}"
        data[col] = [cells[r] for r in rows]
    return pd.DataFrame(data, index=rows, columns=cols)


def dump_model(model: SparseLagModel, config_hash: str = "") -> str:
    d = model.to_dict()
    d["config_hash"] = config_hash
    return json.dumps(d, indent=2, sort_keys=True) + "\n"
