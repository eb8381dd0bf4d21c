"""Final category assignment from sentence and cluster scores."""
import json
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .clustering import ClusterModel
from .corpus_io import SeedLexicon
from .embedding import EmbeddingStore, Vocabulary, sentence_vector
from . import kernels
from .preprocess import TokenizedSentence
from .similarity import ScoreVector, TermSimilarityMatrix, calibrate, category_similarities


@dataclass
class DetectorConfig:
    lexicon: SeedLexicon
    alpha: float = 0.7
    threshold: Optional[float] = None

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")


@dataclass(frozen=True)
class Detection:
    sentence_id: str
    scores: ScoreVector
    assigned: frozenset

    def __post_init__(self):
        object.__setattr__(self, "assigned", frozenset(self.assigned))
        if not self.assigned:
            raise ValueError("a detection always assigns at least one category")

    def to_json(self):
        return {"id": self.sentence_id, "scores": self.scores.as_dict(),
                "assigned": sorted(self.assigned)}


def l2_normalize(values):
    """Row-wise L2 normalisation; zero rows stay zero."""
    v = np.asarray(values, dtype=np.float64)
    norm = np.linalg.norm(v, axis=-1, keepdims=True)
    return np.divide(v, norm, out=np.zeros_like(v), where=norm > 0)


def interpolate_arrays(sent, clust, alpha):
    return alpha * l2_normalize(sent) + (1.0 - alpha) * l2_normalize(clust)


def interpolate(sent: ScoreVector, clust: ScoreVector, alpha: float) -> ScoreVector:
    """``alpha * sent/|sent| + (1 - alpha) * clust/|clust|``."""
    if sent.categories != clust.categories:
        raise ValueError("score vectors cover different categories")
    return ScoreVector(sent.categories, interpolate_arrays(sent.values, clust.values, alpha))


def assign_categories(scores: np.ndarray, threshold: float, categories: Sequence[str],
                      fallback: str) -> frozenset:
    """Categories scoring strictly above ``threshold``; the fallback alone if none do."""
    chosen = frozenset(c for c, v in zip(categories, scores) if v > threshold)
    return chosen or frozenset((fallback,))


def final_scores(sentences: Sequence[TokenizedSentence], model: Optional[ClusterModel],
                 S: TermSimilarityMatrix, store: EmbeddingStore, lexicon: SeedLexicon,
                 alpha: float, sims: Optional[np.ndarray] = None) -> np.ndarray:
    """Interpolated scores for many sentences, ``(n, c)``.

    Sentences without an embedding vector use the sentence scores alone, as
    does ``alpha == 1``.
    """
    if sims is None:
        sims = category_similarities(sentences, lexicon, S, store.vocab)
    sent = calibrate(np.asarray(sims))
    sent = np.atleast_2d(sent) if len(sentences) else np.zeros((0, len(lexicon.names)))
    if alpha == 1.0 or model is None:
        return l2_normalize(sent)
    vecs = [sentence_vector(s, store) for s in sentences]
    has_vec = np.array([v is not None for v in vecs], dtype=bool)
    out = l2_normalize(sent)
    if has_vec.any():
        points = np.vstack([v for v in vecs if v is not None])
        labels, _ = kernels.assign_nearest(points, model.centroids)
        out[has_vec] = interpolate_arrays(sent[has_vec], model.cluster_scores[labels], alpha)
    return out


def detect(sentence: TokenizedSentence, model: ClusterModel, S: TermSimilarityMatrix,
           vocab: Vocabulary, config: DetectorConfig, store: EmbeddingStore) -> Detection:
    return detect_many([sentence], model, S, config, store, vocab=vocab)[0]


def detect_many(sentences: Sequence[TokenizedSentence], model: ClusterModel,
                S: TermSimilarityMatrix, config: DetectorConfig, store: EmbeddingStore,
                vocab: Optional[Vocabulary] = None) -> List[Detection]:
    if config.threshold is None:
        raise ValueError("detector threshold is unset; tune it with threshold_search first")
    if vocab is not None and vocab is not store.vocab and vocab.words != store.vocab.words:
        raise ValueError("vocabulary does not match the embedding store")
    lex = config.lexicon
    scores = final_scores(sentences, model, S, store, lex, config.alpha)
    return [Detection(s.source_id, ScoreVector(lex.names, row),
                      assign_categories(row, config.threshold, lex.names, lex.fallback_category))
            for s, row in zip(sentences, scores)]


def write_detections(detections: Iterable[Detection], path):
    with open(path, "w", encoding="utf-8") as fh:
        for d in detections:
            fh.write(json.dumps(d.to_json(), ensure_ascii=False) + "\n")


def read_detections(path, categories: Sequence[str]) -> List[Detection]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                obj = json.loads(line)
                sv = ScoreVector(tuple(categories), [obj["scores"][c] for c in categories])
                out.append(Detection(obj["id"], sv, frozenset(obj["assigned"])))
    return out
