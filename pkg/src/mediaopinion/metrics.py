"""Classifier evaluation: sentence AUC and article accuracy."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import DataError, DegenerateLabelsError
from .topics import CATEGORIES, Topic


def midranks(values) -> np.ndarray:
    """1-based ranks with tied values sharing the mean of their ranks."""
    values = np.asarray(values, dtype=float)
    order = np.argsort(values, kind="mergesort")
    sorted_vals = values[order]
    ranks = np.empty(len(values), dtype=float)
    # boundaries of runs of equal values
    edges = np.flatnonzero(np.diff(sorted_vals)) + 1
    starts = np.concatenate(([0], edges))
    ends = np.concatenate((edges, [len(values)]))
    for lo, hi in zip(starts, ends):
        ranks[order[lo:hi]] = (lo + 1 + hi) / 2.0
    return ranks


def auc(scores, labels) -> float:
    """Area under the ROC curve via the Mann-Whitney statistic.

    Equals the probability that a random positive outscores a random
    negative, counting ties as one half.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels).astype(bool)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValueError("scores and labels must be 1-d and the same length")
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabelsError("degenerate label set")
    rank_sum = midranks(scores)[labels].sum()
    u = rank_sum - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


@dataclass(frozen=True)
class GoldLabel:
    unit_id: str
    topic: Topic
    label: str


def load_gold_labels(path) -> list:
    """Read ``{"unit_id", "topic", "label"}`` JSON lines."""
    labels, seen = [], set()
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            rec = json.loads(line)
            label = str(rec["label"]).lower()
            if label not in CATEGORIES:
                raise DataError(f"{path}:{lineno}: unknown label {rec['label']!r}")
            gold = GoldLabel(str(rec["unit_id"]), Topic.parse(rec["topic"]), label)
            if (gold.unit_id, gold.topic) in seen:
                raise DataError(f"{path}:{lineno}: ({gold.unit_id}, {gold.topic}) labeled twice")
            seen.add((gold.unit_id, gold.topic))
            labels.append(gold)
    return labels


def article_accuracy(predicted, gold, topic):
    """Fraction of articles whose category for ``topic`` matches the gold label.

    Returns ``(accuracy, standard_error)`` with the binomial standard error
    ``sqrt(p (1 - p) / n)``.
    """
    topic = Topic.parse(topic)
    pred = {p.article_id: p.categories[topic] for p in predicted}
    truth = {g.unit_id: g.label for g in gold if g.topic is topic}
    if set(pred) != set(truth):
        diff = sorted(set(pred) ^ set(truth))
        raise DataError(f"article ids differ between prediction and gold: {diff}")
    n = len(truth)
    if n == 0:
        raise DataError("no gold labels for topic " + topic.value)
    p = sum(pred[k] == v for k, v in truth.items()) / n
    return p, math.sqrt(p * (1 - p) / n)
