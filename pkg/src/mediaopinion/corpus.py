"""Corpus ingestion and sentence segmentation.

The corpus is a JSON-lines file with one article per line carrying the
fields ``id``, ``date`` (ISO-8601 day), ``title`` and ``body``.
"""

from __future__ import annotations

import datetime as dt
import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .exceptions import DataError, DuplicateIdError

log = logging.getLogger(__name__)

DEFAULT_KEYWORDS = ("China", "Chinese", "Beijing", "Peking", "Shanghai")
MAX_TOKENS = 128

_TERMINAL = (".", "!", "?")


@dataclass(frozen=True)
class Sentence:
    article_id: str
    index: int
    tokens: tuple

    @property
    def token_count(self) -> int:
        return len(self.tokens)

    @property
    def text(self) -> str:
        return " ".join(self.tokens)


@dataclass(frozen=True)
class Article:
    id: str
    publication_date: dt.date
    title: str
    body: str

    @property
    def year(self) -> int:
        return self.publication_date.year

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "date": self.publication_date.isoformat(),
            "title": self.title,
            "body": self.body,
        }


@dataclass
class IngestReport:
    """Per-record problems encountered while reading a corpus file."""

    n_read: int = 0
    n_kept: int = 0
    errors: list = field(default_factory=list)

    @property
    def n_errors(self) -> int:
        return len(self.errors)


def keyword_pattern(keywords: Sequence[str]) -> re.Pattern:
    """Compile a case-insensitive whole-word matcher for ``keywords``."""
    words = [k.strip() for k in keywords if k and k.strip()]
    if not words:
        raise DataError("empty filter")
    alternation = "|".join(re.escape(w) for w in sorted(set(words)))
    return re.compile(rf"(?<!\w)(?:{alternation})(?!\w)", re.IGNORECASE)


def parse_record(record: dict) -> Article:
    if not isinstance(record, dict):
        raise ValueError("record is not an object")
    missing = [k for k in ("id", "date", "title", "body") if k not in record]
    if missing:
        raise ValueError(f"missing field(s) {', '.join(missing)}")
    for key in ("id", "date", "title", "body"):
        if not isinstance(record[key], str):
            raise ValueError(f"field {key!r} is not a string")
    if not record["id"]:
        raise ValueError("empty id")
    try:
        date = dt.date.fromisoformat(record["date"].strip())
    except ValueError:
        raise ValueError(f"unparseable date {record['date']!r}") from None
    body = " ".join(record["body"].split())
    if not body:
        raise ValueError("empty body")
    return Article(record["id"], date, " ".join(record["title"].split()), body)


def iter_records(lines: Iterable[str], report: IngestReport):
    """Yield ``(line_number, Article)``, logging malformed lines into ``report``."""
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        report.n_read += 1
        try:
            yield lineno, parse_record(json.loads(line))
        except (ValueError, json.JSONDecodeError) as exc:
            report.errors.append((lineno, str(exc)))
            log.warning("line %d: %s", lineno, exc)


def filter_articles(articles, keywords=DEFAULT_KEYWORDS):
    """Keep articles whose title or body mentions one of ``keywords``.

    Raises on a repeated id. The result is sorted by (date, id) so it does
    not depend on input order.
    """
    pattern = keyword_pattern(keywords)
    seen = set()
    kept = []
    for article in articles:
        if article.id in seen:
            raise DuplicateIdError(f"duplicate article id {article.id!r}")
        seen.add(article.id)
        if pattern.search(article.title) or pattern.search(article.body):
            kept.append(article)
    kept.sort(key=lambda a: (a.publication_date, a.id))
    return kept


def ingest_corpus(path, keywords=DEFAULT_KEYWORDS, report=None):
    """Load and keyword-filter a JSON-lines corpus.

    Parameters
    ----------
    path : str or Path
        Corpus file.
    keywords : sequence of str
        Terms matched case-insensitively as whole words in title or body.
    report : IngestReport, optional
        Collects per-record errors; malformed lines are skipped.

    Returns
    -------
    list of Article
    """
    keyword_pattern(keywords)  # fail fast on an empty filter
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    report = report if report is not None else IngestReport()
    with path.open(encoding="utf-8") as fh:
        articles = [a for _, a in iter_records(fh, report)]
    kept = filter_articles(articles, keywords)
    report.n_kept = len(kept)
    if report.errors:
        log.warning("%d malformed record(s) skipped in %s", report.n_errors, path)
    return kept


def _chunk(tokens, size=MAX_TOKENS):
    return [tokens[i:i + size] for i in range(0, len(tokens), size)]


def split_tokens(text: str) -> list:
    """Split whitespace-delimited ``text`` into sentence token lists."""
    units, current = [], []
    for token in text.split():
        current.append(token)
        if token.endswith(_TERMINAL):
            units.append(current)
            current = []
    if current:
        units.append(current)
    out = []
    for unit in units:
        out.extend(_chunk(unit))
    return out


def segment(article: Article) -> list:
    """Segment an article body into sentences of at most 128 tokens."""
    return [
        Sentence(article.id, i, tuple(tokens))
        for i, tokens in enumerate(split_tokens(article.body))
    ]
