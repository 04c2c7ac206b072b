"""Input checks shared by the estimators."""

from __future__ import annotations

import numpy as np
import pandas as pd

from .exceptions import DataError
from .topics import SIGNS, TOPICS


def check_panel(panel) -> pd.DataFrame:
    """Coerce signed-fraction input to a year-indexed ``(topic, sign)`` frame.

    Accepts the frame itself or a list of ``TopicYearSeries``.
    """
    if not isinstance(panel, pd.DataFrame):
        from .series import signed_panel

        panel = signed_panel(list(panel))
    expected = [(t.value, s) for t in TOPICS for s in SIGNS]
    missing = [c for c in expected if c not in panel.columns]
    if missing:
        raise DataError(f"signed-fraction panel lacks columns {missing}")
    panel = panel.loc[:, expected].astype(float)
    if not panel.index.is_unique:
        raise DataError("duplicate years in signed-fraction panel")
    values = panel.to_numpy()
    if not np.isfinite(values).all():
        raise DataError("signed-fraction panel contains missing or non-finite values")
    pos = panel.xs("positive", axis=1, level=1).to_numpy()
    neg = panel.xs("negative", axis=1, level=1).to_numpy()
    if (pos < 0).any() or (neg > 0).any() or (pos > 1).any() or (neg < -1).any():
        raise DataError("signed fractions must satisfy 0 <= positive <= 1 and -1 <= negative <= 0")
    panel.index = panel.index.astype(int)
    return panel.sort_index()


def check_opinion(y) -> pd.Series:
    """Coerce opinion values to a float series indexed by integer year."""
    if isinstance(y, pd.DataFrame):
        if "mu" not in y.columns:
            raise DataError("opinion table needs a 'mu' column")
        y = y.set_index("year")["mu"] if "year" in y.columns else y["mu"]
    if not isinstance(y, pd.Series):
        y = pd.Series(y)
    y = y.astype(float).dropna()
    y.index = y.index.astype(int)
    if not y.index.is_unique:
        raise DataError("duplicate years in opinion series")
    return y.sort_index()


def check_max_lag(max_lag):
    if not isinstance(max_lag, (int, np.integer)) or max_lag < 0:
        raise ValueError(f"max_lag must be a non-negative integer, got {max_lag!r}")


def check_max_topics(max_topics):
    if not isinstance(max_topics, (int, np.integer)) or not 1 <= max_topics <= len(TOPICS):
        raise ValueError(f"max_topics must be in 1..{len(TOPICS)}, got {max_topics!r}")
