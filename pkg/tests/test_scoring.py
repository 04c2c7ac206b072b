import datetime as dt
import json
import math

import pytest

from mediaopinion.corpus import Article, Sentence, segment
from mediaopinion.exceptions import DataError, MissingScoreError
from mediaopinion.scoring import (LexiconScorer, ReplayScorer, SentenceScore, logistic,
                                  score_sentences)
from mediaopinion.topics import TOPICS, Topic


def test_topic_set_is_closed_and_ordered():
    assert len(TOPICS) == 8
    assert [t.order for t in TOPICS] == list(range(8))
    assert Topic.parse("Culture") is Topic.CULTURE
    with pytest.raises(ValueError):
        Topic.parse("sports")


def _replay_records(sentence_ids, value=(0.1, 0.5)):
    return [
        {"article_id": a, "sentence_index": i, "topic": t.value,
         "p_assign": value[0], "p_positive": value[1]}
        for a, i in sentence_ids for t in TOPICS
    ]


def test_replay_pass_through(write_jsonl):
    records = _replay_records([("a1", 0)])
    for r in records:
        if r["topic"] == "culture":
            r.update(p_assign=0.9, p_positive=0.8)
    scorer = ReplayScorer.from_file(write_jsonl("s.jsonl", records))
    scores = score_sentences([Sentence("a1", 0, ("x",))], scorer)
    assert len(scores) == 8
    culture = [s for s in scores if s.topic is Topic.CULTURE][0]
    assert (culture.p_assign, culture.p_positive) == (0.9, 0.8)


def test_replay_missing_key(write_jsonl):
    records = _replay_records([("a1", 0)])[:-1]
    scorer = ReplayScorer.from_file(write_jsonl("s.jsonl", records))
    with pytest.raises(MissingScoreError, match="culture"):
        score_sentences([Sentence("a1", 0, ("x",))], scorer)


def test_replay_rejects_out_of_range(write_jsonl):
    records = _replay_records([("a1", 0)])
    records[3]["p_positive"] = 1.2
    with pytest.raises(DataError, match="outside"):
        ReplayScorer.from_file(write_jsonl("s.jsonl", records))


def test_replay_output_matches_input_bytes(tmp_path, write_jsonl):
    records = _replay_records([("a1", 0), ("a1", 1)], value=(0.123456789, 0.3))
    src = write_jsonl("s.jsonl", [json.dumps(r, sort_keys=True) for r in records])
    scorer = ReplayScorer.from_file(src)
    scores = score_sentences([Sentence("a1", 0, ("x",)), Sentence("a1", 1, ("y",))], scorer)
    out = "".join(json.dumps(s.to_record(), sort_keys=True) + "\n" for s in scores)
    assert out == src.read_text()


def test_lexicon_no_match():
    scorer = LexiconScorer([("culture", "opera", 1.0)])
    probs = scorer.score_text("Nothing to see here.")
    assert all(pa == 0.0 and pp == 0.5 for pa, pp in probs.values())


def test_lexicon_documented_formula():
    scorer = LexiconScorer([("culture", "opera", 1.0), ("culture", "beautiful", 1.0)])
    pa, pp = scorer.score_text("The opera was beautiful")[Topic.CULTURE]
    # two matches, polarity sum 2
    assert pa == pytest.approx(2 / 3)
    assert pp == pytest.approx(1 / (1 + math.exp(-2)))
    assert pa > 0.5 and pp > 0.5


def test_lexicon_counts_occurrences_and_phrases():
    scorer = LexiconScorer([("democracy", "human rights", -1.0), ("democracy", "vote", 0.5)])
    pa, pp = scorer.score_text("Vote, vote! Human rights matter.")[Topic.DEMOCRACY]
    assert pa == pytest.approx(3 / 4)
    assert pp == pytest.approx(logistic(0.0))


def test_lexicon_pure_function():
    scorer = LexiconScorer([("culture", "opera", 1.0)])
    a = Article("a", dt.date(2000, 1, 1), "", "Opera tonight. Opera tonight.")
    s0, s1 = segment(a)
    first = [(x.p_assign, x.p_positive) for x in scorer.score(s0)]
    assert first == [(x.p_assign, x.p_positive) for x in scorer.score(s1)]


def test_parallel_scoring_matches_serial():
    scorer = LexiconScorer([("culture", "opera", 1.0), ("ideology", "party", -1.0)])
    sentences = [Sentence("a", i, tuple(f"opera party w{i}".split()[: 1 + i % 3]))
                 for i in range(50)]
    assert score_sentences(sentences, scorer, n_jobs=4) == score_sentences(sentences, scorer)


def test_score_record_round_trip():
    s = SentenceScore("a", 2, Topic.DEMOCRACY, 0.25, 0.75)
    assert SentenceScore.from_record(s.to_record()) == s
