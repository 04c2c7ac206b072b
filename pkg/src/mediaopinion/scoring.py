"""Per-sentence topic scorers.

Two scorers share one output contract, a :class:`SentenceScore` per
(sentence, topic):

* :class:`ReplayScorer` replays probabilities produced elsewhere, e.g. by
  fine-tuned transformer classifiers.
* :class:`LexiconScorer` is a deterministic keyword baseline used to run the
  pipeline without any model weights.
"""

from __future__ import annotations

import json
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .exceptions import DataError, MissingScoreError
from .topics import TOPICS, Topic


@dataclass(frozen=True)
class SentenceScore:
    article_id: str
    sentence_index: int
    topic: Topic
    p_assign: float
    p_positive: float

    @property
    def key(self):
        return (self.article_id, self.sentence_index, self.topic)

    def to_record(self) -> dict:
        return {
            "article_id": self.article_id,
            "sentence_index": self.sentence_index,
            "topic": self.topic.value,
            "p_assign": self.p_assign,
            "p_positive": self.p_positive,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "SentenceScore":
        return cls(
            str(rec["article_id"]),
            int(rec["sentence_index"]),
            Topic.parse(rec["topic"]),
            _probability(rec["p_assign"], "p_assign"),
            _probability(rec["p_positive"], "p_positive"),
        )


def _probability(value, name):
    p = float(value)
    if not 0.0 <= p <= 1.0:
        raise DataError(f"{name}={value!r} outside [0, 1]")
    return p


def logistic(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


class ReplayScorer:
    """Look up externally computed probabilities keyed by (article, sentence, topic)."""

    name = "replay"

    def __init__(self, table: dict):
        self.table = table

    @classmethod
    def from_file(cls, path) -> "ReplayScorer":
        table = {}
        with Path(path).open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    score = SentenceScore.from_record(json.loads(line))
                except (KeyError, ValueError) as exc:
                    raise DataError(f"{path}:{lineno}: {exc}") from exc
                table[score.key] = score
        return cls(table)

    def score(self, sentence) -> list:
        out = []
        for topic in TOPICS:
            key = (sentence.article_id, sentence.index, topic)
            try:
                out.append(self.table[key])
            except KeyError:
                raise MissingScoreError(
                    f"replay file has no score for article={key[0]!r} "
                    f"sentence={key[1]} topic={topic.value}"
                ) from None
        return out


_STRIP = re.compile(r"^\W+|\W+$")


def normalize_token(token: str) -> str:
    return _STRIP.sub("", token.lower())


class LexiconScorer:
    """Keyword baseline scorer.

    Each lexicon entry ``(topic, term, weight)`` marks ``term`` as evidence
    for ``topic`` and contributes ``weight`` to its polarity. With ``m``
    matched occurrences for a topic and polarity sum ``w``::

        p_assign   = m / (m + 1)
        p_positive = logistic(w)

    Terms may span several tokens; matching is on lower-cased tokens with
    leading and trailing punctuation removed.
    """

    name = "lexicon"

    def __init__(self, entries):
        self.entries = {}
        for topic, term, weight in entries:
            words = tuple(normalize_token(t) for t in str(term).split())
            words = tuple(w for w in words if w)
            if not words:
                raise DataError(f"empty lexicon term for {topic}")
            self.entries.setdefault(Topic.parse(topic), {})[words] = float(weight)

    @classmethod
    def from_file(cls, path) -> "LexiconScorer":
        entries = []
        with Path(path).open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                    entries.append((rec["topic"], rec["term"], rec.get("weight", 0.0)))
                except (KeyError, ValueError) as exc:
                    raise DataError(f"{path}:{lineno}: {exc}") from exc
        return cls(entries)

    def _matches(self, words, topic):
        m, w = 0, 0.0
        for term, weight in self.entries.get(topic, {}).items():
            k = len(term)
            for i in range(len(words) - k + 1):
                if words[i:i + k] == term:
                    m += 1
                    w += weight
        return m, w

    def score_text(self, text: str) -> dict:
        words = tuple(normalize_token(t) for t in text.split())
        out = {}
        for topic in TOPICS:
            m, w = self._matches(words, topic)
            out[topic] = (m / (m + 1.0), logistic(w))
        return out

    def score(self, sentence) -> list:
        probs = self.score_text(sentence.text)
        return [
            SentenceScore(sentence.article_id, sentence.index, t, *probs[t])
            for t in TOPICS
        ]


def make_scorer(name: str, path):
    if name == "replay":
        return ReplayScorer.from_file(path)
    if name == "lexicon":
        return LexiconScorer.from_file(path)
    raise ValueError(f"unknown scorer {name!r}; expected 'replay' or 'lexicon'")


def score_sentences(sentences, scorer, n_jobs: int = 1) -> list:
    """Score every sentence in every topic; eight scores per sentence.

    Output order follows input order regardless of ``n_jobs``.
    """
    sentences = list(sentences)
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            chunks = list(pool.map(scorer.score, sentences))
    else:
        chunks = [scorer.score(s) for s in sentences]
    return [score for chunk in chunks for score in chunk]
