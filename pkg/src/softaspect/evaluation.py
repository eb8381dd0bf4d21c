"""Micro-averaged metrics, baselines, threshold search and hyperparameter sweeps."""
import csv
import json
import logging
from collections import Counter
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .clustering import KmeansConfig, build_cluster_model
from .corpus_io import LabeledSentence, SeedLexicon
from .detector import Detection, final_scores
from .embedding import EmbeddingStore
from .errors import ValidationError
from .preprocess import TokenizedSentence
from .similarity import ScoreVector, TermSimilarityMatrix, category_similarities

logger = logging.getLogger(__name__)

DEFAULT_GRID = tuple(round(0.01 * i, 2) for i in range(101))


@dataclass(frozen=True)
class MicroMetrics:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int

    @classmethod
    def from_counts(cls, tp, fp, fn):
        tp, fp, fn = int(tp), int(fp), int(fn)
        p = tp / (tp + fp) if tp + fp else 1.0
        r = tp / (tp + fn) if tp + fn else 1.0
        f1 = 2 * p * r / (p + r) if p + r else 0.0
        return cls(p, r, f1, tp, fp, fn)

    def to_json(self):
        return asdict(self)


@dataclass
class SweepResult:
    parameter: str
    points: List[Tuple[float, MicroMetrics]] = field(default_factory=list)
    thresholds: List[float] = field(default_factory=list)

    def __post_init__(self):
        values = [v for v, _ in self.points]
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("sweep values must be strictly increasing")

    def best(self):
        return max(self.points, key=lambda p: p[1].f1)

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["param", "value", "precision", "recall", "f1"])
            for value, m in self.points:
                w.writerow([self.parameter, value, m.precision, m.recall, m.f1])


def _check_ids(ids: Sequence[str], gold: Sequence[LabeledSentence]):
    ref = {g.id: g for g in gold}
    if len(set(ids)) != len(ids) or len(ref) != len(gold):
        raise ValidationError("duplicate sentence ids")
    missing = sorted(set(ref) - set(ids))
    extra = sorted(set(ids) - set(ref))
    if missing or extra:
        raise ValidationError(f"prediction ids do not match gold ids: missing={missing} extra={extra}")
    return ref


def micro_metrics(predictions: Sequence[Detection], gold: Sequence[LabeledSentence]) -> MicroMetrics:
    """Counts over (sentence, category) pairs, the fallback category included."""
    ref = _check_ids([d.sentence_id for d in predictions], gold)
    pred = {d.sentence_id: d for d in predictions}
    tp = fp = fn = 0
    for sid, g in ref.items():
        p = pred[sid].assigned
        tp += len(p & g.gold_categories)
        fp += len(p - g.gold_categories)
        fn += len(g.gold_categories - p)
    return MicroMetrics.from_counts(tp, fp, fn)


def _constant_detection(sid, labels, categories):
    return Detection(sid, ScoreVector(categories, np.zeros(len(categories))), frozenset(labels))


def random_baseline(train: Sequence[LabeledSentence], test: Sequence[LabeledSentence],
                    rng_seed=0) -> List[Detection]:
    """One category per test sentence, drawn by training label frequency."""
    if not train:
        raise ValueError("training data must be non-empty")
    freq = Counter(c for s in train for c in s.gold_categories)
    labels = sorted(freq)
    p = np.array([freq[c] for c in labels], dtype=np.float64)
    rng = np.random.default_rng(rng_seed)
    draws = rng.choice(len(labels), size=len(test), p=p / p.sum())
    return [_constant_detection(s.id, (labels[d],), ()) for s, d in zip(test, draws)]


def majority_labels(train: Sequence[LabeledSentence], n=2):
    freq = Counter(c for s in train for c in s.gold_categories)
    return tuple(c for c, _ in sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))[:n])


def majority_baseline(test: Sequence[LabeledSentence],
                      labels=("food", "anecdotes/miscellaneous")) -> List[Detection]:
    """The same label set for every sentence (by default the two most common training labels)."""
    return [_constant_detection(s.id, labels, ()) for s in test]


def _gold_matrix(ids, gold, categories, fallback):
    ref = {g.id: g for g in gold}
    cols = list(categories) + [fallback]
    G = np.zeros((len(ids), len(cols)), dtype=bool)
    extra_fn = 0
    for r, sid in enumerate(ids):
        labels = ref[sid].gold_categories
        for c, name in enumerate(cols):
            G[r, c] = name in labels
        extra_fn += len(labels - set(cols))
    return G, extra_fn


def metrics_at_thresholds(scores: np.ndarray, G: np.ndarray, grid, extra_fn=0) -> List[MicroMetrics]:
    """Micro metrics for every threshold, fallback rule re-applied each time."""
    out = []
    for t in grid:
        P = scores > t
        fallback = ~P.any(axis=1)
        pred = np.column_stack([P, fallback])
        tp = int(np.sum(pred & G))
        fp = int(np.sum(pred & ~G))
        fn = int(np.sum(~pred & G)) + extra_fn
        out.append(MicroMetrics.from_counts(tp, fp, fn))
    return out


def threshold_search(scored: Sequence[Tuple[str, ScoreVector]], gold: Sequence[LabeledSentence],
                     grid: Sequence[float] = DEFAULT_GRID,
                     fallback: str = "anecdotes/miscellaneous") -> Tuple[float, MicroMetrics]:
    """Grid threshold with the highest micro-F1 (smallest threshold on ties).

    ``scored`` pairs sentence ids with final score vectors; scores are computed
    once and reused for every grid value.
    """
    grid = list(grid)
    if not grid:
        raise ValueError("threshold grid must be non-empty")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("threshold grid must be sorted")
    ids = [sid for sid, _ in scored]
    _check_ids(ids, gold)
    if not scored:
        return grid[0], MicroMetrics.from_counts(0, 0, 0)
    categories = scored[0][1].categories
    scores = np.vstack([sv.values for _, sv in scored])
    G, extra_fn = _gold_matrix(ids, gold, categories, fallback)
    results = metrics_at_thresholds(scores, G, grid, extra_fn)
    best = 0
    for i, m in enumerate(results):
        if m.f1 > results[best].f1:
            best = i
    return grid[best], results[best]


# -- sweeps -----------------------------------------------------------------

@dataclass
class PipelineContext:
    """Shared, immutable inputs of a sweep.

    ``tune`` is the threshold-tuning set; ``None`` tunes on ``evaluate``
    directly.
    """
    unlabeled: Sequence[TokenizedSentence]
    store: EmbeddingStore
    S: TermSimilarityMatrix
    lexicon: SeedLexicon
    evaluate: Tuple[Sequence[TokenizedSentence], Sequence[LabeledSentence]]
    tune: Optional[Tuple[Sequence[TokenizedSentence], Sequence[LabeledSentence]]] = None
    kmeans: KmeansConfig = field(default_factory=KmeansConfig)
    grid: Sequence[float] = DEFAULT_GRID

    def __post_init__(self):
        vocab = self.store.vocab
        self._unlabeled_sims = category_similarities(self.unlabeled, self.lexicon, self.S, vocab)
        self._eval_sims = category_similarities(self.evaluate[0], self.lexicon, self.S, vocab)
        self._tune_sims = (None if self.tune is None else
                           category_similarities(self.tune[0], self.lexicon, self.S, vocab))
        self._models = {}

    @property
    def tune_on_test(self):
        return self.tune is None

    def cluster_model(self, k):
        if k not in self._models:
            cfg = replace(self.kmeans, k=k)
            self._models[k] = build_cluster_model(self.unlabeled, self.store, self.lexicon, self.S,
                                                  cfg, sims=self._unlabeled_sims)
        return self._models[k]

    def _scored(self, split, sims, model, alpha):
        sentences, _ = split
        scores = final_scores(sentences, model, self.S, self.store, self.lexicon, alpha, sims=sims)
        return [(s.source_id, ScoreVector(self.lexicon.names, row))
                for s, row in zip(sentences, scores)]

    def run(self, k, alpha):
        """Tune the threshold, then score the evaluation split; returns (threshold, metrics)."""
        model = self.cluster_model(k)
        fallback = self.lexicon.fallback_category
        ev = self._scored(self.evaluate, self._eval_sims, model, alpha)
        if self.tune_on_test:
            return threshold_search(ev, self.evaluate[1], self.grid, fallback)
        tn = self._scored(self.tune, self._tune_sims, model, alpha)
        threshold, _ = threshold_search(tn, self.tune[1], self.grid, fallback)
        _, metrics = threshold_search(ev, self.evaluate[1], [threshold], fallback)
        return threshold, metrics


def sweep_alpha(ctx: PipelineContext, alphas: Sequence[float], k: int = 17) -> SweepResult:
    """Vary the interpolation weight; clusters are built once and reused."""
    runs = [(float(a), ctx.run(k, float(a))) for a in alphas]
    return SweepResult("alpha", [(a, m) for a, (_, m) in runs], [t for _, (t, _) in runs])


def sweep_k(ctx: PipelineContext, ks: Sequence[int], alpha: float = 0.7) -> SweepResult:
    """Vary the number of clusters; re-clusters per value."""
    runs = [(int(k), ctx.run(int(k), alpha)) for k in ks]
    return SweepResult("k", [(k, m) for k, (_, m) in runs], [t for _, (t, _) in runs])


def write_metrics_json(report: Dict, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
