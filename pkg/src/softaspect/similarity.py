"""Term similarity kernel, soft cosine, and seed-based sentence scores."""
import hashlib
import json
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence

import numpy as np
import scipy.sparse as sp

from . import kernels
from .corpus_io import SeedLexicon
from .embedding import EmbeddingStore, Vocabulary
from .errors import ParseError, ValidationError
from .preprocess import TokenizedSentence

BagOfWords = Dict[int, float]

_HEADER_PREFIX = "# softaspect-termsim "


def vocab_hash(vocab: Vocabulary) -> str:
    return hashlib.sha256("\n".join(vocab.words).encode("utf-8")).hexdigest()[:16]


@dataclass
class TermSimilarityMatrix:
    """Sparse symmetric word-word similarity with an implicit unit diagonal.

    ``matrix`` stores the full symmetric CSR form, diagonal included, which is
    what the soft cosine kernels consume.
    """
    matrix: sp.csr_matrix
    exponent: float = 2.0
    threshold: float = 0.0
    nonzero_limit: int = 100
    vocab_hash: str = ""

    @property
    def vocab_size(self):
        return self.matrix.shape[0]

    def __getitem__(self, ij):
        i, j = ij
        return float(self.matrix[i, j])

    def upper_triangle(self):
        """Sorted off-diagonal ``(i, j, value)`` arrays with ``i < j``."""
        coo = sp.triu(self.matrix, k=1).tocoo()
        order = np.lexsort((coo.col, coo.row))
        return coo.row[order].astype(np.int64), coo.col[order].astype(np.int64), coo.data[order]

    def offdiag_counts(self):
        m = self.matrix.tocsr()
        return np.diff(m.indptr) - (m.diagonal() != 0)

    def toarray(self):
        return self.matrix.toarray()

    @classmethod
    def from_triples(cls, vocab_size, rows, cols, vals, **params):
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        diag = np.arange(vocab_size, dtype=np.int64)
        r = np.concatenate([rows, cols, diag])
        c = np.concatenate([cols, rows, diag])
        v = np.concatenate([vals, vals, np.ones(vocab_size)])
        m = sp.csr_matrix((v, (r, c)), shape=(vocab_size, vocab_size))
        m.sort_indices()
        return cls(m, **params)

    @classmethod
    def identity(cls, vocab_size):
        return cls(sp.identity(vocab_size, format="csr"), exponent=1.0, threshold=0.0,
                   nonzero_limit=1)


def _candidates(vectors, exponent, limit, chunk=1024):
    """Top ``limit`` neighbours per row by clipped cosine, best first."""
    n = vectors.shape[0]
    norms = np.linalg.norm(vectors, axis=1)
    good = norms > 0
    unit = np.zeros_like(vectors)
    unit[good] = vectors[good] / norms[good, None]
    m = min(limit, n - 1)
    cand_idx = np.full((n, max(m, 0)), -1, dtype=np.int64)
    cand_val = np.zeros((n, max(m, 0)))
    if m <= 0:
        return cand_idx, cand_val
    cols = np.arange(n)
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        sims = np.clip(unit[lo:hi] @ unit.T, 0.0, 1.0) ** exponent
        sims[np.arange(hi - lo), np.arange(lo, hi)] = -1.0
        sims[~good[lo:hi]] = 0.0
        if m < n - 1:
            part = np.argpartition(-sims, m - 1, axis=1)[:, :m]
        else:
            part = np.broadcast_to(cols, sims.shape)
        pv = np.take_along_axis(sims, part, axis=1)
        # best first, lower index on ties
        order = np.lexsort((part, -pv), axis=1)
        idx = np.take_along_axis(part, order, axis=1)
        val = np.take_along_axis(pv, order, axis=1)
        if m == n - 1:
            idx, val = idx[:, :m], val[:, :m]  # the self entry (-1) sorts last
        cand_idx[lo:hi] = idx
        cand_val[lo:hi] = val
    return cand_idx, cand_val


def build_term_similarity(store: EmbeddingStore, exponent: float = 2.0, threshold: float = 0.0,
                          nonzero_limit: int = 100) -> TermSimilarityMatrix:
    """``s(i, j) = max(0, cos(v_i, v_j)) ** exponent`` over each word's nearest neighbours.

    Entries must exceed ``threshold``.  Selection is symmetric and keeps at most
    ``nonzero_limit`` off-diagonal entries per row.  Zero vectors get an empty row.
    """
    if len(store) == 0:
        raise ValidationError("empty embedding store")
    if not exponent > 0:
        raise ValueError("exponent must be positive")
    if not 0.0 <= threshold < 1.0:
        raise ValueError("threshold must lie in [0, 1)")
    if nonzero_limit < 1:
        raise ValueError("nonzero_limit must be positive")
    cand_idx, cand_val = _candidates(store.vectors, exponent, nonzero_limit)
    rows, cols, vals = kernels.select_neighbors(cand_idx, cand_val, threshold, nonzero_limit)
    return TermSimilarityMatrix.from_triples(
        len(store), rows, cols, vals, exponent=float(exponent), threshold=float(threshold),
        nonzero_limit=int(nonzero_limit), vocab_hash=vocab_hash(store.vocab))


def save_term_similarity(S: TermSimilarityMatrix, path):
    header = {"vocab_size": S.vocab_size, "vocab_hash": S.vocab_hash, "exponent": S.exponent,
              "threshold": S.threshold, "nonzero_limit": S.nonzero_limit}
    rows, cols, vals = S.upper_triangle()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_HEADER_PREFIX + json.dumps(header, sort_keys=True) + "\n")
        for i, j, v in zip(rows.tolist(), cols.tolist(), vals.tolist()):
            fh.write(f"{i} {j} {v!r}\n")


def load_term_similarity(path) -> TermSimilarityMatrix:
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
        if not first.startswith(_HEADER_PREFIX):
            raise ParseError("missing term similarity header", 1)
        header = json.loads(first[len(_HEADER_PREFIX):])
        rows, cols, vals = [], [], []
        for lineno, line in enumerate(fh, 2):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 3:
                raise ParseError("expected 'i j value'", lineno)
            rows.append(int(parts[0]))
            cols.append(int(parts[1]))
            vals.append(float(parts[2]))
    return TermSimilarityMatrix.from_triples(
        header["vocab_size"], rows, cols, vals, exponent=header["exponent"],
        threshold=header["threshold"], nonzero_limit=header["nonzero_limit"],
        vocab_hash=header["vocab_hash"])


# -- soft cosine ------------------------------------------------------------

def bag_of_words(tokens: Iterable[str], vocab: Vocabulary) -> BagOfWords:
    """Raw term counts of in-vocabulary tokens."""
    bag: BagOfWords = {}
    for i in vocab.encode(tokens):
        bag[i] = bag.get(i, 0.0) + 1.0
    return bag


def _arrays(bag):
    items = sorted((i, v) for i, v in bag.items() if v != 0)
    idx = np.fromiter((i for i, _ in items), dtype=np.int64, count=len(items))
    val = np.fromiter((v for _, v in items), dtype=np.float64, count=len(items))
    return idx, val


def soft_cosine(a: BagOfWords, b: BagOfWords, S: TermSimilarityMatrix) -> float:
    """``a.S.b / (sqrt(a.S.a) sqrt(b.S.b))``; 0 for empty bags or non-positive forms."""
    ia, va = _arrays(a)
    ib, vb = _arrays(b)
    if ia.size == 0 or ib.size == 0:
        return 0.0
    if ia.max() >= S.vocab_size or ib.max() >= S.vocab_size:
        raise IndexError("bag index outside the vocabulary")
    M = S.matrix
    ab = va @ M[ia][:, ib].toarray() @ vb
    aa = va @ M[ia][:, ia].toarray() @ va
    bb = vb @ M[ib][:, ib].toarray() @ vb
    if aa <= 0 or bb <= 0:
        return 0.0
    return float(min(1.0, max(-1.0, ab / (math.sqrt(aa) * math.sqrt(bb)))))


def sentence_category_similarity(x: BagOfWords, seeds: Sequence[str], S: TermSimilarityMatrix,
                                 vocab: Vocabulary) -> float:
    """Mean soft cosine between the sentence and each seed as a one-word bag.

    Seeds missing from the vocabulary contribute 0 but still count.
    """
    if not seeds:
        raise ValueError("seed list must be non-empty")
    total = 0.0
    for seed in seeds:
        j = vocab.get(seed)
        if j is not None:
            total += soft_cosine(x, {j: 1.0}, S)
    return total / len(seeds)


def calibrate(sim):
    """Sigmoid ``e^x / (1 + e^x)``, overflow-free for any finite input."""
    x = np.asarray(sim, dtype=np.float64)
    z = np.exp(-np.abs(x))
    out = np.where(x >= 0, 1.0 / (1.0 + z), z / (1.0 + z))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ScoreVector:
    """Per-category scores in lexicon order (fallback excluded)."""
    categories: tuple
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (len(self.categories),):
            raise ValueError("one value per category required")
        if not np.isfinite(vals).all():
            raise ValueError("scores must be finite")
        object.__setattr__(self, "categories", tuple(self.categories))
        object.__setattr__(self, "values", vals)

    def __getitem__(self, category):
        return float(self.values[self.categories.index(category)])

    def __eq__(self, other):
        if not isinstance(other, ScoreVector):
            return NotImplemented
        return self.categories == other.categories and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.categories, self.values.tobytes()))

    def as_dict(self):
        return {c: float(v) for c, v in zip(self.categories, self.values)}


def _seed_layout(lexicon: SeedLexicon, vocab: Vocabulary):
    seeds, owner = [], []
    for c, (_, words) in enumerate(lexicon.categories):
        for w in words:
            j = vocab.get(w)
            seeds.append(-1 if j is None else j)
            owner.append(c)
    sizes = np.array([len(w) for _, w in lexicon.categories], dtype=np.float64)
    return np.asarray(seeds, dtype=np.int64), np.asarray(owner, dtype=np.int64), sizes


def category_similarities(sentences: Sequence[TokenizedSentence], lexicon: SeedLexicon,
                          S: TermSimilarityMatrix, vocab: Vocabulary) -> np.ndarray:
    """Uncalibrated sentence-category similarity for many sentences, ``(n, c)``."""
    indptr, indices, values = [0], [], []
    for s in sentences:
        bag = bag_of_words(s.tokens, vocab)
        for i in sorted(bag):
            indices.append(i)
            values.append(bag[i])
        indptr.append(len(indices))
    seeds, owner, sizes = _seed_layout(lexicon, vocab)
    per_seed = kernels.seed_soft_cosines(indptr, indices, values, S.matrix, seeds)
    sums = np.zeros((len(sentences), len(sizes)))
    for q, c in enumerate(owner):
        sums[:, c] += per_seed[:, q]
    return sums / sizes


def sent_score(x: TokenizedSentence, lexicon: SeedLexicon, S: TermSimilarityMatrix,
               vocab: Vocabulary) -> ScoreVector:
    bag = bag_of_words(x.tokens, vocab)
    sims = [sentence_category_similarity(bag, seeds, S, vocab) for _, seeds in lexicon.categories]
    return ScoreVector(lexicon.names, calibrate(np.asarray(sims)))


def sent_scores(sentences: Sequence[TokenizedSentence], lexicon: SeedLexicon,
                S: TermSimilarityMatrix, vocab: Vocabulary) -> List[ScoreVector]:
    cal = calibrate(category_similarities(sentences, lexicon, S, vocab))
    return [ScoreVector(lexicon.names, row) for row in np.atleast_2d(cal)]
