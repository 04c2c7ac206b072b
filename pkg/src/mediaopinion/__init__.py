"""Media sentiment series, survey harmonization and sparse lagged opinion regression."""

__version__ = "0.1.0"

from .aggregation import ArticleAggregator, ArticleSentiment, aggregate_article
from .corpus import Article, Sentence, ingest_corpus, segment
from .harmonize import SurveyHarmonizer, SurveyWave, harmonize, wave_mean
from .metrics import article_accuracy, auc
from .nnls import NNLSRegression, nnls_fit
from .regression import (CandidatePredictor, SparseLagModel, SparseLagRegressor,
                         evaluate_model, greedy_group_select)
from .scoring import LexiconScorer, ReplayScorer, SentenceScore, score_sentences
from .series import TopicYearSeries, build_series, signed_fraction
from .topics import TOPICS, Topic

__all__ = [
    "Article", "ArticleAggregator", "ArticleSentiment", "CandidatePredictor",
    "LexiconScorer", "NNLSRegression", "ReplayScorer", "Sentence", "SentenceScore",
    "SparseLagModel", "SparseLagRegressor", "SurveyHarmonizer", "SurveyWave", "TOPICS",
    "Topic", "TopicYearSeries", "aggregate_article", "article_accuracy", "auc",
    "build_series", "evaluate_model", "greedy_group_select", "harmonize", "ingest_corpus",
    "nnls_fit", "score_sentences", "segment", "signed_fraction", "wave_mean",
]
