"""Synthetic data generators for tests, demos and the bundled example run."""

from __future__ import annotations

import datetime as dt
import json
from pathlib import Path

import numpy as np
import pandas as pd

from .harmonize import SurveyWave, write_waves
from .series import TopicYearSeries
from .topics import TOPICS, Topic

BUNDLE_DIR = Path(__file__).parent / "data" / "synthetic"


def random_series(years, rng, n_total=1000, low=0.05, high=0.45) -> list:
    """Independent random positive/negative counts for every (topic, year)."""
    out = []
    for topic in TOPICS:
        for year in years:
            f = rng.uniform(low, high, size=2)
            n_pos, n_neg = (int(round(x * n_total)) for x in f)
            fp, fn = n_pos / n_total, n_neg / n_total
            out.append(TopicYearSeries(
                topic, int(year), n_total, n_pos, n_neg, fp, fn,
                float(np.sqrt(fp * (1 - fp) / n_total)),
                float(np.sqrt(fn * (1 - fn) / n_total))))
    return out


def make_planted_series(n_years=40, start=1975, max_lag=5, noise=0.01, seed=0,
                        terms=None, intercept=0.0):
    """Series and opinion with a planted sparse lagged relationship.

    The default plants ``mu_t = 2 F[culture, t-1, +] + 1 F[democracy, t-1, -]``
    plus Gaussian noise, where the negative-sign fraction enters reverse-coded.

    Returns
    -------
    series : list of TopicYearSeries
        Covers ``start - max_lag`` through ``start + n_years - 1``.
    opinion : pandas.Series indexed by year
    """
    if terms is None:
        terms = [(Topic.CULTURE, 1, "positive", 2.0), (Topic.DEMOCRACY, 1, "negative", 1.0)]
    rng = np.random.default_rng(seed)
    years = list(range(start - max_lag, start + n_years))
    series = random_series(years, rng)
    lookup = {(s.topic, s.year): s for s in series}
    opinion = {}
    for t in range(start, start + n_years):
        mu = intercept
        for topic, lag, sign, beta in terms:
            s = lookup[topic, t - lag]
            mu += beta * (s.f_positive if sign == "positive" else -s.f_negative)
        opinion[t] = mu + rng.normal(0.0, noise)
    return series, pd.Series(opinion, name="mu", dtype=float)


def level_probabilities(target_mean, levels):
    """Exponentially tilted distribution over ``levels`` with the given mean."""
    levels = np.asarray(levels, dtype=float)
    target_mean = float(np.clip(target_mean, levels[0] + 1e-9, levels[-1] - 1e-9))
    lo, hi = -50.0, 50.0
    for _ in range(200):
        theta = 0.5 * (lo + hi)
        p = np.exp(theta * levels - np.max(theta * levels))
        p /= p.sum()
        if p @ levels < target_mean:
            lo = theta
        else:
            hi = theta
    return p


def make_waves(latent, specs, n=500, seed=0, waves_per_year=1, sample=True) -> list:
    """Survey waves whose expected means follow ``a * latent + b`` per series.

    Parameters
    ----------
    latent : mapping year -> value in [-1, 1]
    specs : mapping series_id -> (first_year, last_year, scale_levels, a, b)
    n : int
        Respondents per wave.
    sample : bool
        Draw multinomial counts; otherwise round the expected counts.
    """
    rng = np.random.default_rng(seed)
    waves = []
    for sid in sorted(specs):
        first, last, k, a, b = specs[sid]
        levels = np.linspace(-1.0, 1.0, k)
        for year in range(first, last + 1):
            p = level_probabilities(a * latent[year] + b, levels)
            for _ in range(waves_per_year):
                if sample:
                    counts = rng.multinomial(n, p)
                else:
                    counts = np.round(p * n).astype(int)
                waves.append(SurveyWave(sid, year, tuple(int(c) for c in counts)))
    return waves


_LEXICON = [
    ("culture", "opera", 0.0), ("culture", "art", 0.0), ("culture", "cuisine", 0.0),
    ("culture", "beautiful", 1.5), ("culture", "dull", -1.5),
    ("democracy", "election", 0.0), ("democracy", "dissidents", 0.0),
    ("democracy", "crackdown", -1.5), ("democracy", "reform", 1.0),
    ("globalization", "trade", 0.0), ("globalization", "open", 1.0),
    ("economic_development", "growth", 1.0), ("economic_development", "recession", -1.0),
    ("government_administration", "ministry", 0.0), ("government_administration", "corrupt", -1.5),
    ("ideology", "communist", -0.5), ("marketization", "market", 0.5),
    ("welfare_wellbeing", "poverty", -1.0),
]

_SENTENCES = {
    ("culture", 1): "A beautiful opera from Beijing opened in New York.",
    ("culture", -1): "Critics found the Chinese art exhibit dull.",
    ("democracy", 1): "Officials in China promised reform before the election.",
    ("democracy", -1): "A crackdown on dissidents followed in Beijing.",
    ("globalization", 1): "Shanghai will open its ports to trade.",
    ("economic_development", 1): "Chinese growth surprised economists.",
    ("economic_development", -1): "A recession hit Chinese factories.",
    ("government_administration", -1): "The ministry was called corrupt by Chinese critics.",
    ("ideology", -1): "The communist party of China held a plenum.",
    ("marketization", 1): "A new market opened in Peking.",
    ("welfare_wellbeing", -1): "Rural poverty persisted in China.",
}
_FILLER = [
    "Reporters filed dispatches from the region.",
    "The weather was mild that spring!",
    "Was the visit a success?",
]


def make_synthetic_corpus(first_year=1970, last_year=1994, per_year=2, seed=0):
    """Articles whose culture tone drifts with a smooth latent opinion curve.

    Returns ``(records, latent)`` where ``latent`` maps year to the opinion
    value used to generate survey waves.
    """
    rng = np.random.default_rng(seed)
    years = list(range(first_year, last_year + 1))
    latent = {y: 0.4 * np.sin((y - 1974) / 4.0) for y in years}
    records = []
    for year in years:
        for k in range(per_year):
            # next year's opinion tracks this year's culture tone
            p_culture = 0.5 + 0.45 * latent.get(year + 1, latent[year]) / 0.4
            parts = [_SENTENCES[("culture", 1 if rng.random() < p_culture else -1)]]
            parts.append(_SENTENCES[("democracy", 1 if rng.random() < 0.3 else -1)])
            for key in sorted(_SENTENCES):
                if key[0] not in ("culture", "democracy") and rng.random() < 0.3:
                    parts.append(_SENTENCES[key])
            parts.append(_FILLER[int(rng.integers(len(_FILLER)))])
            month = int(rng.integers(1, 13))
            records.append({
                "id": f"syn-{year}-{k:02d}",
                "date": dt.date(year, month, 1 + int(rng.integers(28))).isoformat(),
                "title": f"Dispatch {k + 1} from China, {year}",
                "body": " ".join(parts),
            })
    return records, latent


def write_synthetic_bundle(directory, seed=0):
    """Write corpus, lexicon, survey waves and a run config to ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    records, latent = make_synthetic_corpus(seed=seed)
    with (directory / "corpus.jsonl").open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    with (directory / "lexicon.jsonl").open("w", encoding="utf-8") as fh:
        for topic, term, weight in _LEXICON:
            fh.write(json.dumps({"topic": topic, "term": term, "weight": weight},
                                sort_keys=True) + "\n")
    specs = {"gallup4": (1974, 1986, 4, 1.0, 0.0), "thermo10": (1983, 1994, 10, 0.6, 0.1)}
    write_waves(make_waves(latent, specs, n=800, seed=seed), directory / "waves.csv")
    config = {
        "corpus": "corpus.jsonl", "lexicon": "lexicon.jsonl", "waves": "waves.csv",
        "scorer": "lexicon", "max_lag": 3, "max_topics": 3, "n_bootstrap": 200, "seed": 0,
    }
    (directory / "config.json").write_text(json.dumps(config, indent=2, sort_keys=True) + "\n")
    return directory
