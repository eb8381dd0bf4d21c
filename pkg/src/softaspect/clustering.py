"""k-means over averaged sentence embeddings and per-cluster category priors."""
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import kernels
from .corpus_io import SeedLexicon
from .embedding import EmbeddingStore, Vocabulary, sentence_vectors
from .errors import ConfigurationError
from .preprocess import TokenizedSentence
from .similarity import ScoreVector, TermSimilarityMatrix, calibrate, category_similarities

logger = logging.getLogger(__name__)


@dataclass
class KmeansConfig:
    k: int = 17
    max_iters: int = 300
    tolerance: float = 1e-4
    rng_seed: int = 0
    n_init: int = 10

    def __post_init__(self):
        if self.k < 1:
            raise ConfigurationError("k must be at least 1")
        if self.max_iters < 1 or self.n_init < 1:
            raise ConfigurationError("max_iters and n_init must be positive")
        if self.tolerance < 0:
            raise ConfigurationError("tolerance must be non-negative")


@dataclass
class KmeansResult:
    assignments: np.ndarray
    centroids: np.ndarray
    inertia: float
    n_iter: int = 0
    # inertia after every assignment step of the winning run
    history: List[float] = field(default_factory=list)

    def __iter__(self):
        return iter((self.assignments, self.centroids, self.inertia))


def kmeans_plusplus(points, k, rng):
    """D^2-weighted seeding."""
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]))
    centroids[0] = points[rng.integers(n)]
    d2 = ((points - centroids[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0:
            # every point coincides with a chosen centre
            idx = rng.integers(n)
        else:
            idx = min(int(np.searchsorted(np.cumsum(d2), rng.random() * total, side="right")), n - 1)
        centroids[j] = points[idx]
        d2 = np.minimum(d2, ((points - centroids[j]) ** 2).sum(axis=1))
    return centroids


def _lloyd(points, centroids, max_iters, tol):
    k = centroids.shape[0]
    history = []
    labels, dist2 = kernels.assign_nearest(points, centroids)
    history.append(float(dist2.sum()))
    n_iter = 0
    for n_iter in range(1, max_iters + 1):
        sums, counts = kernels.centroid_sums(points, labels, k)
        new = centroids.copy()
        filled = counts > 0
        new[filled] = sums[filled] / counts[filled, None]
        for j in np.flatnonzero(~filled):
            # empty cluster: move it onto the point farthest from its centroid
            far = int(np.argmax(dist2))
            new[j] = points[far]
            dist2[far] = 0.0
        shift = float(np.max(np.abs(new - centroids)))
        centroids = new
        labels, dist2 = kernels.assign_nearest(points, centroids)
        history.append(float(dist2.sum()))
        if shift <= tol:
            break
    return labels, centroids, float(dist2.sum()), n_iter, history


def kmeans(points, config: Optional[KmeansConfig] = None) -> KmeansResult:
    """Lloyd's algorithm with k-means++ seeding; best of ``n_init`` restarts.

    The returned assignments are always the nearest-centroid labels for the
    returned centroids.
    """
    config = config or KmeansConfig()
    points = np.ascontiguousarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ValueError("points must be a 2-D array")
    n = points.shape[0]
    if n < config.k:
        raise ConfigurationError(f"need at least k={config.k} points, got {n}")
    if not np.isfinite(points).all():
        raise ValueError("points must be finite")
    rng = np.random.default_rng(config.rng_seed)
    best = None
    for _ in range(config.n_init):
        init = kmeans_plusplus(points, config.k, rng)
        labels, centroids, inertia, n_iter, history = _lloyd(points, init, config.max_iters,
                                                            config.tolerance)
        if best is None or inertia < best.inertia:
            best = KmeansResult(labels, centroids, inertia, n_iter, history)
    return best


@dataclass
class ClusterModel:
    centroids: np.ndarray
    cluster_scores: np.ndarray  # k x c, calibrated
    sizes: np.ndarray
    categories: tuple

    def __post_init__(self):
        self.centroids = np.asarray(self.centroids, dtype=np.float64)
        self.cluster_scores = np.asarray(self.cluster_scores, dtype=np.float64)
        self.sizes = np.asarray(self.sizes, dtype=np.int64)
        self.categories = tuple(self.categories)
        if self.cluster_scores.shape != (self.k, len(self.categories)):
            raise ValueError("cluster_scores must be k x n_categories")
        if self.sizes.shape != (self.k,):
            raise ValueError("one size per cluster required")

    @property
    def k(self):
        return self.centroids.shape[0]

    @property
    def dim(self):
        return self.centroids.shape[1]

    def score_vector(self, j) -> ScoreVector:
        return ScoreVector(self.categories, self.cluster_scores[j])


def cluster_similarities(assignments, sims: np.ndarray, k: int) -> np.ndarray:
    """Mean uncalibrated similarity per cluster; empty clusters get 0."""
    assignments = np.asarray(assignments, dtype=np.int64)
    sums = np.zeros((k, sims.shape[1]))
    np.add.at(sums, assignments, sims)
    counts = np.bincount(assignments, minlength=k)
    out = np.zeros_like(sums)
    nz = counts > 0
    out[nz] = sums[nz] / counts[nz, None]
    return out


def cluster_category_scores(assignments, sentences: Sequence[TokenizedSentence],
                            lexicon: SeedLexicon, S: TermSimilarityMatrix, vocab: Vocabulary,
                            k: Optional[int] = None) -> List[ScoreVector]:
    """Calibrated mean of member sentences' raw similarities, one vector per cluster."""
    assignments = np.asarray(assignments, dtype=np.int64)
    if len(assignments) != len(sentences):
        raise ValueError("assignments and sentences must align")
    if k is None:
        k = int(assignments.max()) + 1 if len(assignments) else 0
    sims = category_similarities(sentences, lexicon, S, vocab)
    scores = calibrate(cluster_similarities(assignments, sims, k))
    return [ScoreVector(lexicon.names, row) for row in np.atleast_2d(scores)]


def build_cluster_model(sentences: Sequence[TokenizedSentence], store: EmbeddingStore,
                        lexicon: SeedLexicon, S: TermSimilarityMatrix,
                        config: Optional[KmeansConfig] = None,
                        sims: Optional[np.ndarray] = None) -> ClusterModel:
    """Cluster sentence vectors and attach category priors.

    Sentences without any in-vocabulary token are left out.  ``sims`` may
    carry precomputed :func:`category_similarities` for ``sentences``.
    """
    config = config or KmeansConfig()
    points, kept = sentence_vectors(sentences, store)
    dropped = len(sentences) - len(kept)
    if dropped:
        logger.info("excluded %d sentences with no in-vocabulary token from clustering", dropped)
    result = kmeans(points, config)
    if sims is None:
        sims = category_similarities([sentences[i] for i in kept], lexicon, S, store.vocab)
    else:
        sims = np.asarray(sims)[kept]
    scores = calibrate(cluster_similarities(result.assignments, sims, config.k))
    sizes = np.bincount(result.assignments, minlength=config.k)
    return ClusterModel(result.centroids, np.atleast_2d(scores), sizes, lexicon.names)


def nearest_cluster(sentence_vec, model: ClusterModel) -> Optional[int]:
    """Index of the closest centroid (lowest index on ties); ``None`` for no vector."""
    if sentence_vec is None:
        return None
    v = np.asarray(sentence_vec, dtype=np.float64)
    if v.shape != (model.dim,):
        raise ValueError(f"expected a {model.dim}-dimensional vector")
    labels, _ = kernels.assign_nearest(v[None, :], model.centroids)
    return int(labels[0])


def save_cluster_model(model: ClusterModel, directory, extra: Optional[dict] = None):
    """Write ``clusters.json`` (header and scores) and ``centroids.npy``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    header = {"k": model.k, "dim": model.dim, "sizes": model.sizes.tolist(),
              "categories": list(model.categories),
              "cluster_scores": model.cluster_scores.tolist()}
    if extra:
        header.update(extra)
    (directory / "clusters.json").write_text(json.dumps(header, indent=1) + "\n", encoding="utf-8")
    np.save(directory / "centroids.npy", model.centroids)


def load_cluster_model(directory) -> ClusterModel:
    directory = Path(directory)
    header = json.loads((directory / "clusters.json").read_text(encoding="utf-8"))
    centroids = np.load(directory / "centroids.npy")
    if centroids.shape != (header["k"], header["dim"]):
        raise ValueError("centroid matrix does not match the header")
    return ClusterModel(centroids, header["cluster_scores"], header["sizes"], header["categories"])
