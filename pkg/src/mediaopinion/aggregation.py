"""Sentence probabilities to article-level sentiment categories."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import DataError
from .topics import TOPICS, Topic


@dataclass(frozen=True)
class ArticleSentiment:
    article_id: str
    year: int
    categories: dict  # Topic -> "positive" | "negative" | "neutral"

    def to_records(self):
        return [
            {"article_id": self.article_id, "year": self.year,
             "topic": t.value, "category": self.categories[t]}
            for t in TOPICS
        ]


def _check_thresholds(tau_assign, tau_sent, deadband):
    if not 0.0 < tau_assign <= 1.0:
        # tau_assign = 1 is admitted: it marks every article neutral unless p_assign hits 1
        raise ValueError(f"tau_assign must lie in (0, 1], got {tau_assign}")
    if not 0.0 < tau_sent < 1.0:
        raise ValueError(f"tau_sent must lie in (0, 1), got {tau_sent}")
    if deadband < 0:
        raise ValueError(f"deadband must be non-negative, got {deadband}")


def decide(assigned, tau_sent=0.5, deadband=0.0) -> str:
    """Category for one topic from its assigned ``(p_assign, p_positive)`` pairs."""
    if not assigned:
        return "neutral"
    total = sum(pa for pa, _ in assigned)
    mean = sum(pa * pp for pa, pp in assigned) / total
    if mean >= tau_sent + deadband:
        return "positive"
    if mean <= tau_sent - deadband:
        return "negative"
    return "neutral"


def aggregate_article(scores, year, tau_assign=0.5, tau_sent=0.5, deadband=0.0):
    """Combine all sentence scores of one article into an :class:`ArticleSentiment`.

    A sentence counts toward topic ``k`` when its ``p_assign >= tau_assign``.
    The category follows the ``p_assign``-weighted mean of ``p_positive``
    over counted sentences: positive at or above ``tau_sent + deadband``,
    negative at or below ``tau_sent - deadband``, neutral otherwise or when
    no sentence is counted.
    """
    _check_thresholds(tau_assign, tau_sent, deadband)
    scores = list(scores)
    if not scores:
        raise DataError("no sentence scores for article")
    article_ids = {s.article_id for s in scores}
    if len(article_ids) != 1:
        raise DataError(f"scores span several articles: {sorted(article_ids)}")
    article_id = article_ids.pop()

    by_sentence = defaultdict(dict)
    for s in scores:
        by_sentence[s.sentence_index][s.topic] = s
    for idx in sorted(by_sentence):
        for topic in TOPICS:
            if topic not in by_sentence[idx]:
                raise DataError(
                    f"article {article_id!r} sentence {idx} has no score for topic {topic.value}"
                )

    categories = {}
    for topic in TOPICS:
        assigned = [
            (row[topic].p_assign, row[topic].p_positive)
            for _, row in sorted(by_sentence.items())
            if row[topic].p_assign >= tau_assign
        ]
        categories[topic] = decide(assigned, tau_sent, deadband)
    return ArticleSentiment(article_id, int(year), categories)


class ArticleAggregator(BaseEstimator, TransformerMixin):
    """Stateless transformer mapping sentence scores to article sentiments.

    ``transform`` takes an iterable of :class:`SentenceScore` and a mapping
    ``article_id -> year``; articles without any score are neutral in every
    topic.
    """

    def __init__(self, tau_assign=0.5, tau_sent=0.5, deadband=0.0):
        self.tau_assign = tau_assign
        self.tau_sent = tau_sent
        self.deadband = deadband

    def fit(self, X=None, y=None):
        _check_thresholds(self.tau_assign, self.tau_sent, self.deadband)
        return self

    def transform(self, X, years=None):
        if years is None:
            raise ValueError("years mapping article_id -> year is required")
        grouped = defaultdict(list)
        for score in X:
            grouped[score.article_id].append(score)
        unknown = sorted(set(grouped) - set(years))
        if unknown:
            raise DataError(f"scores for unknown article(s): {unknown}")
        out = []
        for article_id in sorted(years, key=lambda a: (years[a], a)):
            if grouped.get(article_id):
                out.append(aggregate_article(
                    grouped[article_id], years[article_id],
                    self.tau_assign, self.tau_sent, self.deadband))
            else:
                out.append(ArticleSentiment(
                    article_id, int(years[article_id]), {t: "neutral" for t in TOPICS}))
        return out


def parse_sentiments(records) -> list:
    """Rebuild :class:`ArticleSentiment` objects from flat per-topic records."""
    grouped = {}
    for rec in records:
        aid = str(rec["article_id"])
        entry = grouped.setdefault(aid, (int(rec["year"]), {}))
        if entry[0] != int(rec["year"]):
            raise DataError(f"article {aid!r} listed under two years")
        category = str(rec["category"])
        if category not in ("positive", "negative", "neutral"):
            raise DataError(f"unknown category {category!r}")
        entry[1][Topic.parse(rec["topic"])] = category
    out = []
    for aid, (year, cats) in grouped.items():
        missing = [t.value for t in TOPICS if t not in cats]
        if missing:
            raise DataError(f"article {aid!r} lacks categories for {missing}")
        out.append(ArticleSentiment(aid, year, cats))
    return sorted(out, key=lambda s: (s.year, s.article_id))
