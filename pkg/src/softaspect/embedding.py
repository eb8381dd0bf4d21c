"""CBOW word embeddings: vocabulary, training, word2vec text I/O, averaging."""
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np

from . import kernels
from .errors import ConfigurationError, ParseError, TrainingError
from .preprocess import TokenizedSentence

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Vocabulary:
    words: tuple
    counts: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        words = tuple(self.words)
        object.__setattr__(self, "words", words)
        index = {w: i for i, w in enumerate(words)}
        if len(index) != len(words):
            raise ValueError("vocabulary words must be unique")
        object.__setattr__(self, "_index", index)

    @property
    def index(self):
        return self._index

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self._index

    def get(self, word, default=None):
        return self._index.get(word, default)

    def encode(self, tokens):
        """Indices of in-vocabulary tokens; OOV tokens are skipped."""
        idx = self._index
        return [idx[t] for t in tokens if t in idx]


@dataclass
class CbowConfig:
    dim: int = 300
    window: int = 5
    negative_samples: int = 5
    epochs: int = 5
    initial_learning_rate: float = 0.025
    min_learning_rate: float = 0.0001
    min_count: int = 5
    rng_seed: int = 1

    def __post_init__(self):
        for name in ("dim", "window", "negative_samples", "min_count"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be positive")
        if self.dim < 2:
            raise ConfigurationError("dim must be at least 2")
        if self.epochs < 0:
            raise ConfigurationError("epochs must be non-negative")
        if not self.initial_learning_rate > 0:
            raise ConfigurationError("initial_learning_rate must be positive")


@dataclass
class EmbeddingStore:
    vocab: Vocabulary
    vectors: np.ndarray

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        if self.vectors.ndim != 2 or self.vectors.shape[0] != len(self.vocab):
            raise ValueError("vectors must be a |V| x dim matrix")
        if not np.isfinite(self.vectors).all():
            raise ValueError("embedding vectors must be finite")

    @property
    def dim(self):
        return self.vectors.shape[1]

    def __len__(self):
        return len(self.vocab)

    def __contains__(self, word):
        return word in self.vocab

    def __getitem__(self, word):
        return self.vectors[self.vocab.index[word]]


def build_vocabulary(corpus: Sequence[TokenizedSentence], min_count: int = 5) -> Vocabulary:
    """Words seen at least ``min_count`` times, by descending count then alphabetically."""
    if not corpus:
        raise ConfigurationError("cannot build a vocabulary from an empty corpus")
    counts = Counter(t for s in corpus for t in s.tokens)
    kept = sorted((w for w, c in counts.items() if c >= min_count), key=lambda w: (-counts[w], w))
    if not kept:
        raise ConfigurationError(f"no word occurs at least min_count={min_count} times")
    return Vocabulary(tuple(kept), {w: counts[w] for w in kept})


def _flatten(corpus, vocab):
    tokens, offsets = [], [0]
    for s in corpus:
        ids = vocab.encode(s.tokens)
        if ids:
            tokens.extend(ids)
            offsets.append(len(tokens))
    return np.asarray(tokens, dtype=np.int64), np.asarray(offsets, dtype=np.int64)


def noise_distribution(vocab: Vocabulary, power: float = 0.75) -> np.ndarray:
    weights = np.array([vocab.counts.get(w, 1) for w in vocab.words], dtype=np.float64) ** power
    return weights / weights.sum()


def init_vectors(n_words, dim, rng):
    """Input vectors uniform in [-0.5/dim, 0.5/dim); output vectors zero."""
    syn0 = (rng.random((n_words, dim)) - 0.5) / dim
    syn1neg = np.zeros((n_words, dim))
    return syn0, syn1neg


def train_cbow(corpus: Sequence[TokenizedSentence], config: Optional[CbowConfig] = None,
               vocab: Optional[Vocabulary] = None, return_output_vectors=False):
    """Train CBOW embeddings (mean of context, negative sampling).

    Deterministic for a fixed ``config.rng_seed``: all random draws (window
    shrinkage, negative samples) come from one seeded generator and are fed
    to the single-threaded kernel.
    """
    config = config or CbowConfig()
    vocab = vocab or build_vocabulary(corpus, config.min_count)
    tokens, offsets = _flatten(corpus, vocab)
    if tokens.size < config.window:
        raise TrainingError(
            f"corpus has {tokens.size} in-vocabulary tokens, fewer than window={config.window}")

    rng = np.random.default_rng(config.rng_seed)
    syn0, syn1neg = init_vectors(len(vocab), config.dim, rng)
    cdf = np.cumsum(noise_distribution(vocab))
    cdf[-1] = 1.0
    n = tokens.size
    total = float(n * max(config.epochs, 1))
    for epoch in range(config.epochs):
        reduced = rng.integers(0, config.window, size=n, dtype=np.int64)
        negs = np.searchsorted(cdf, rng.random((n, config.negative_samples)), side="right")
        negs = np.minimum(negs, len(vocab) - 1).astype(np.int64)
        loss = kernels.cbow_epoch(syn0, syn1neg, tokens, offsets, reduced, negs, config.window,
                                  config.initial_learning_rate, config.min_learning_rate,
                                  epoch * n, total)
        logger.debug("epoch %d: mean loss %.5f", epoch + 1, loss / n)
    if not np.isfinite(syn0).all():
        raise TrainingError("training diverged: non-finite embedding values")
    store = EmbeddingStore(vocab, syn0)
    if return_output_vectors:
        return store, syn1neg
    return store


def cbow_loss(syn0, syn1neg, context, center, negatives):
    """Negative-sampling loss for one (context window, centre word) example.

    ``-log s(u_c . h) - sum_n log s(-u_n . h)`` where ``h`` is the mean of the
    context input vectors.  Negatives equal to the centre are skipped, as in
    training.
    """
    h = syn0[list(context)].mean(axis=0)
    loss = -np.log(kernels._stable_sigmoid(h @ syn1neg[center]))
    for n in negatives:
        if n == center:
            continue
        loss -= np.log(kernels._stable_sigmoid(-(h @ syn1neg[n])))
    return float(loss)


def cbow_gradients(syn0, syn1neg, context, center, negatives):
    """Analytic gradients of :func:`cbow_loss` w.r.t. both weight matrices."""
    context = list(context)
    h = syn0[context].mean(axis=0)
    g_in = np.zeros_like(syn0)
    g_out = np.zeros_like(syn1neg)
    targets = [(center, 1.0)] + [(n, 0.0) for n in negatives if n != center]
    err = np.zeros_like(h)
    for t, label in targets:
        coef = float(kernels._stable_sigmoid(h @ syn1neg[t])) - label
        err += coef * syn1neg[t]
        g_out[t] += coef * h
    for c in context:
        g_in[c] += err / len(context)
    return g_in, g_out


# -- word2vec text format ---------------------------------------------------

def save_word2vec_text(store: EmbeddingStore, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(store)} {store.dim}\n")
        for word, vec in zip(store.vocab.words, store.vectors):
            fh.write(word + " " + " ".join("%.6g" % v for v in vec) + "\n")


def load_word2vec_text(path) -> EmbeddingStore:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ParseError("expected header '<count> <dim>'", 1)
        try:
            count, dim = int(header[0]), int(header[1])
        except ValueError as exc:
            raise ParseError("non-integer header", 1) from exc
        words, rows = [], []
        for lineno, line in enumerate(fh, 2):
            parts = line.rstrip("\n").rstrip().split(" ")
            if parts == [""]:
                continue
            if len(parts) != dim + 1:
                raise ParseError(f"expected {dim} values, found {len(parts) - 1}", lineno)
            try:
                rows.append([float(x) for x in parts[1:]])
            except ValueError as exc:
                raise ParseError(f"non-numeric value: {exc}", lineno) from exc
            words.append(parts[0])
    if len(words) != count:
        raise ParseError(f"header declares {count} words, file has {len(words)}")
    vectors = np.asarray(rows, dtype=np.float64).reshape(len(words), dim)
    return EmbeddingStore(Vocabulary(tuple(words)), vectors)


# -- sentence averaging -----------------------------------------------------

def sentence_vector(sentence: TokenizedSentence, store: EmbeddingStore) -> Optional[np.ndarray]:
    """Mean vector of in-vocabulary tokens, or ``None`` if there are none."""
    ids = store.vocab.encode(sentence.tokens)
    if not ids:
        return None
    return store.vectors[ids].mean(axis=0)


def sentence_vectors(sentences: Sequence[TokenizedSentence], store: EmbeddingStore):
    """Stack sentence vectors; returns ``(matrix, kept_positions)``."""
    vecs, kept = [], []
    for i, s in enumerate(sentences):
        v = sentence_vector(s, store)
        if v is not None:
            vecs.append(v)
            kept.append(i)
    matrix = np.vstack(vecs) if vecs else np.empty((0, store.dim))
    return matrix, np.asarray(kept, dtype=np.int64)
