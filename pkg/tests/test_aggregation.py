import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mediaopinion.aggregation import ArticleAggregator, aggregate_article, parse_sentiments
from mediaopinion.exceptions import DataError
from mediaopinion.scoring import SentenceScore
from mediaopinion.topics import TOPICS, Topic

ORDER = {"negative": 0, "neutral": 1, "positive": 2}


def scores_for(rows, default=(0.1, 0.5), article="a"):
    """rows: list of {Topic: (p_assign, p_positive)} per sentence."""
    return [
        SentenceScore(article, i, t, *row.get(t, default))
        for i, row in enumerate(rows) for t in TOPICS
    ]


def test_all_unassigned_is_neutral():
    res = aggregate_article(scores_for([{}, {}, {}]), 1990)
    assert set(res.categories.values()) == {"neutral"}


def test_single_positive_sentence():
    res = aggregate_article(scores_for([{Topic.CULTURE: (0.9, 0.8)}]), 1990)
    assert res.categories[Topic.CULTURE] == "positive"
    assert res.categories[Topic.DEMOCRACY] == "neutral"


def test_weighted_mean_negative():
    rows = [{Topic.DEMOCRACY: (0.9, 0.2)}, {Topic.DEMOCRACY: (0.6, 0.3)}]
    assert (0.9 * 0.2 + 0.6 * 0.3) / 1.5 == pytest.approx(0.24)
    assert aggregate_article(scores_for(rows), 1990).categories[Topic.DEMOCRACY] == "negative"


def test_deadband_makes_neutral():
    rows = [{Topic.CULTURE: (0.9, 0.55)}]
    assert aggregate_article(scores_for(rows), 1990).categories[Topic.CULTURE] == "positive"
    res = aggregate_article(scores_for(rows), 1990, deadband=0.1)
    assert res.categories[Topic.CULTURE] == "neutral"


def test_missing_topic_is_fatal():
    scores = scores_for([{}])[:-1]
    with pytest.raises(DataError, match="culture"):
        aggregate_article(scores, 1990)


def test_tau_assign_one():
    rows = [{t: (0.999, 0.9) for t in TOPICS}]
    res = aggregate_article(scores_for(rows), 1990, tau_assign=1.0)
    assert set(res.categories.values()) == {"neutral"}


def test_bad_thresholds():
    with pytest.raises(ValueError):
        aggregate_article(scores_for([{}]), 1990, tau_sent=1.0)


prob = st.floats(0, 1)
sentence_rows = st.lists(st.tuples(prob, prob), min_size=1, max_size=8)


@settings(max_examples=200)
@given(sentence_rows, st.integers(0, 7), st.floats(0, 1))
def test_monotone_in_p_positive(rows, which, bump):
    which %= len(rows)
    before = scores_for([{Topic.CULTURE: r} for r in rows])
    raised = list(rows)
    pa, pp = raised[which]
    raised[which] = (pa, min(1.0, pp + bump))
    after = scores_for([{Topic.CULTURE: r} for r in raised])
    c0 = aggregate_article(before, 2000).categories[Topic.CULTURE]
    c1 = aggregate_article(after, 2000).categories[Topic.CULTURE]
    assert ORDER[c1] >= ORDER[c0]


@settings(max_examples=100)
@given(sentence_rows, st.randoms())
def test_permutation_invariant(rows, rnd):
    base = aggregate_article(scores_for([{Topic.CULTURE: r} for r in rows]), 2000)
    shuffled = scores_for([{Topic.CULTURE: r} for r in rows])
    rnd.shuffle(shuffled)
    assert aggregate_article(shuffled, 2000) == base


def test_aggregator_transform_and_records():
    scores = scores_for([{Topic.CULTURE: (0.9, 0.9)}], article="a") + scores_for(
        [{Topic.DEMOCRACY: (0.9, 0.1)}], article="b")
    agg = ArticleAggregator().fit()
    out = agg.transform(scores, years={"a": 1990, "b": 1989, "c": 1990})
    assert [s.article_id for s in out] == ["b", "a", "c"]
    assert out[2].categories == {t: "neutral" for t in TOPICS}
    records = [r for s in out for r in s.to_records()]
    random.Random(0).shuffle(records)
    assert parse_sentiments(records) == out
    assert agg.get_params() == {"tau_assign": 0.5, "tau_sent": 0.5, "deadband": 0.0}
