"""Yearly per-topic sentiment fractions and volumes."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, asdict

import pandas as pd

from .exceptions import DataError, EmptyYearError
from .topics import SIGNS, TOPICS, Topic

SERIES_COLUMNS = [
    "topic", "year", "n_total", "n_positive", "n_negative",
    "f_positive", "f_negative", "se_positive", "se_negative",
]


@dataclass(frozen=True)
class TopicYearSeries:
    topic: Topic
    year: int
    n_total: int
    n_positive: int
    n_negative: int
    f_positive: float
    f_negative: float
    se_positive: float
    se_negative: float

    @property
    def n_neutral(self) -> int:
        return self.n_total - self.n_positive - self.n_negative


def _se(f, n):
    return math.sqrt(f * (1.0 - f) / n) if n else 0.0


def build_series(sentiments, year_range=None, denominator="all"):
    """Count positive and negative articles per (topic, year).

    Parameters
    ----------
    sentiments : iterable of ArticleSentiment
    year_range : (int, int), optional
        Inclusive; defaults to the span of the input years.
    denominator : {"all", "topic"}
        ``"all"`` divides by every article of the year. ``"topic"`` divides
        by the articles carrying sentiment in the topic, ignoring neutral
        ones (a year without any then has fractions of zero).

    Returns
    -------
    list of TopicYearSeries, ordered by topic then year.
    """
    if denominator not in ("all", "topic"):
        raise ValueError(f"denominator must be 'all' or 'topic', got {denominator!r}")
    sentiments = list(sentiments)
    if year_range is None:
        if not sentiments:
            raise DataError("no article sentiments")
        years = [s.year for s in sentiments]
        year_range = (min(years), max(years))
    lo, hi = int(year_range[0]), int(year_range[1])
    if lo > hi:
        raise ValueError(f"empty year range {year_range}")

    totals = Counter()
    counts = Counter()
    for s in sentiments:
        if not lo <= s.year <= hi:
            raise DataError(f"article {s.article_id!r} year {s.year} outside {lo}..{hi}")
        totals[s.year] += 1
        for topic, cat in s.categories.items():
            if cat != "neutral":
                counts[topic, s.year, cat] += 1

    empty = [y for y in range(lo, hi + 1) if totals[y] == 0]
    if empty:
        raise EmptyYearError(f"empty year: {', '.join(map(str, empty))}")

    out = []
    for topic in TOPICS:
        for year in range(lo, hi + 1):
            n_pos = counts[topic, year, "positive"]
            n_neg = counts[topic, year, "negative"]
            n = totals[year] if denominator == "all" else n_pos + n_neg
            f_pos = n_pos / n if n else 0.0
            f_neg = n_neg / n if n else 0.0
            out.append(TopicYearSeries(
                topic, year, totals[year], n_pos, n_neg,
                f_pos, f_neg, _se(f_pos, n), _se(f_neg, n)))
    return out


def signed_fraction(series: TopicYearSeries, sign: str) -> float:
    """Reverse-coded fraction: ``+f_positive`` or ``-f_negative``."""
    if sign == "positive":
        return series.f_positive
    if sign == "negative":
        return -series.f_negative
    raise ValueError(f"sign must be 'positive' or 'negative', got {sign!r}")


def series_to_frame(series) -> pd.DataFrame:
    rows = []
    for s in series:
        row = asdict(s)
        row["topic"] = s.topic.value
        rows.append(row)
    return pd.DataFrame(rows, columns=SERIES_COLUMNS)


def series_from_frame(frame: pd.DataFrame) -> list:
    missing = [c for c in SERIES_COLUMNS if c not in frame.columns]
    if missing:
        raise DataError(f"series table lacks columns {missing}")
    return [
        TopicYearSeries(
            Topic.parse(r.topic), int(r.year), int(r.n_total), int(r.n_positive),
            int(r.n_negative), float(r.f_positive), float(r.f_negative),
            float(r.se_positive), float(r.se_negative))
        for r in frame.itertuples(index=False)
    ]


def signed_panel(series) -> pd.DataFrame:
    """Year-indexed frame of signed fractions with ``(topic, sign)`` columns.

    This is the input layout expected by :class:`SparseLagRegressor`.
    """
    data = {}
    for s in series:
        for sign in SIGNS:
            data.setdefault((s.topic.value, sign), {})[s.year] = signed_fraction(s, sign)
    columns = pd.MultiIndex.from_tuples(
        [(t.value, sign) for t in TOPICS for sign in SIGNS], names=["topic", "sign"])
    frame = pd.DataFrame(data).reindex(columns=columns)
    frame.index.name = "year"
    return frame.sort_index()
