"""Unsupervised aspect category detection for review sentences.

Sentences are scored against per-category seed words with the soft cosine
measure, and the scores are combined with priors from k-means clusters of
unlabeled reviews.
"""
from ._accel import get_backend, set_backend
from .clustering import ClusterModel, KmeansConfig, build_cluster_model, kmeans, nearest_cluster
from .corpus_io import (LabeledSentence, SeedLexicon, SentenceFilter, UnlabeledSentence,
                        ingest_unlabeled, load_seed_lexicon, parse_labeled_corpus)
from .detector import Detection, DetectorConfig, detect, detect_many, interpolate
from .embedding import (CbowConfig, EmbeddingStore, Vocabulary, build_vocabulary,
                        load_word2vec_text, save_word2vec_text, sentence_vector, train_cbow)
from .evaluation import (MicroMetrics, PipelineContext, SweepResult, majority_baseline,
                         micro_metrics, random_baseline, sweep_alpha, sweep_k, threshold_search)
from .preprocess import StopwordSet, TokenizedSentence, load_stopwords, tokenize
from .similarity import (ScoreVector, TermSimilarityMatrix, build_term_similarity, calibrate,
                         sent_score, sentence_category_similarity, soft_cosine)

__version__ = "0.1.0"

__all__ = [
    "get_backend", "set_backend", "ClusterModel", "KmeansConfig", "build_cluster_model",
    "kmeans", "nearest_cluster", "LabeledSentence", "SeedLexicon", "SentenceFilter",
    "UnlabeledSentence", "ingest_unlabeled", "load_seed_lexicon", "parse_labeled_corpus",
    "Detection", "DetectorConfig", "detect", "detect_many", "interpolate", "CbowConfig",
    "EmbeddingStore", "Vocabulary", "build_vocabulary", "load_word2vec_text",
    "save_word2vec_text", "sentence_vector", "train_cbow", "MicroMetrics", "PipelineContext",
    "SweepResult", "majority_baseline", "micro_metrics", "random_baseline", "sweep_alpha",
    "sweep_k", "threshold_search", "StopwordSet", "TokenizedSentence", "load_stopwords",
    "tokenize", "ScoreVector", "TermSimilarityMatrix", "build_term_similarity", "calibrate",
    "sent_score", "sentence_category_similarity", "soft_cosine",
]
