import numpy as np
import pytest
from hypothesis import given, strategies as st

from softaspect import kernels
from softaspect.embedding import (CbowConfig, EmbeddingStore, Vocabulary, build_vocabulary,
                                  cbow_gradients, cbow_loss, init_vectors, load_word2vec_text,
                                  save_word2vec_text, sentence_vector, train_cbow)
from softaspect.errors import ConfigurationError, ParseError, TrainingError
from softaspect.preprocess import TokenizedSentence
from softaspect.synthetic import make_two_topic_corpus


def ts(*tokens):
    return TokenizedSentence(tokens)


def test_vocabulary_threshold_and_order():
    corpus = [ts("food", "good"), ts("food", "bad")]
    assert build_vocabulary(corpus, 2).words == ("food",)
    vocab = build_vocabulary(corpus, 1)
    assert vocab.words == ("food", "bad", "good")
    assert vocab.index == {"food": 0, "bad": 1, "good": 2}
    assert vocab.counts == {"food": 2, "bad": 1, "good": 1}
    with pytest.raises(ConfigurationError):
        build_vocabulary(corpus, 3)
    with pytest.raises(ConfigurationError):
        build_vocabulary([], 1)


def test_default_config():
    cfg = CbowConfig()
    assert cfg.dim == 300
    assert (cfg.window, cfg.negative_samples, cfg.epochs, cfg.min_count) == (5, 5, 5, 5)
    assert cfg.initial_learning_rate == 0.025
    with pytest.raises(ConfigurationError):
        CbowConfig(dim=1)


def _finite_difference(f, x, eps=1e-6):
    grad = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        orig = x[idx]
        x[idx] = orig + eps
        up = f()
        x[idx] = orig - eps
        down = f()
        x[idx] = orig
        grad[idx] = (up - down) / (2 * eps)
    return grad


def test_gradient_check_tiny_instance():
    rng = np.random.default_rng(7)
    syn0 = rng.normal(size=(5, 3))
    syn1 = rng.normal(size=(5, 3))
    context, center, negatives = [0, 1, 1, 2], 3, [4, 0, 3]
    g_in, g_out = cbow_gradients(syn0, syn1, context, center, negatives)
    loss = lambda: cbow_loss(syn0, syn1, context, center, negatives)  # noqa: E731
    num_in = _finite_difference(loss, syn0)
    num_out = _finite_difference(loss, syn1)
    # one input vector, as well as the full matrices
    rel = np.linalg.norm(g_in[1] - num_in[1]) / np.linalg.norm(num_in[1])
    assert rel < 1e-4
    assert np.allclose(g_in, num_in, atol=1e-8)
    assert np.allclose(g_out, num_out, atol=1e-8)


def test_kernel_step_is_gradient_descent(backend):
    rng = np.random.default_rng(3)
    syn0 = rng.normal(size=(5, 3))
    syn1 = rng.normal(size=(5, 3))
    tokens = np.array([0, 1], dtype=np.int64)
    offsets = np.array([0, 2], dtype=np.int64)
    reduced = np.zeros(2, dtype=np.int64)
    negs = np.array([[2, 3], [4, 1]], dtype=np.int64)  # second row hits the centre: skipped
    lr = 0.1
    exp0, exp1 = syn0.copy(), syn1.copy()
    for pos, (ctx, center) in enumerate([([1], 0), ([0], 1)]):
        g_in, g_out = cbow_gradients(exp0, exp1, ctx, center, list(negs[pos]))
        exp0 -= lr * g_in
        exp1 -= lr * g_out
    kernels.cbow_epoch(syn0, syn1, tokens, offsets, reduced, negs, 1, lr, lr, 0, 2)
    np.testing.assert_allclose(syn0, exp0, rtol=0, atol=1e-14)
    np.testing.assert_allclose(syn1, exp1, rtol=0, atol=1e-14)


def _topic_gap(store, topic_a, topic_b):
    unit = store.vectors / np.linalg.norm(store.vectors, axis=1, keepdims=True)
    ia = [store.vocab.index[w] for w in topic_a]
    ib = [store.vocab.index[w] for w in topic_b]
    cos = unit @ unit.T

    def intra(ix):
        block = cos[np.ix_(ix, ix)]
        return (block.sum() - np.trace(block)) / (block.size - len(ix))

    return (intra(ia) + intra(ib)) / 2, cos[np.ix_(ia, ib)].mean()


def test_topic_separation(backend):
    sentences, a, b = make_two_topic_corpus(n_sentences=200, seed=0)
    store = train_cbow(sentences, CbowConfig(dim=16, epochs=50, min_count=1, rng_seed=11))
    intra, inter = _topic_gap(store, a, b)
    assert intra > inter
    assert np.isfinite(store.vectors).all()


def test_backends_agree():
    from softaspect import _accel
    sentences, _, _ = make_two_topic_corpus(n_sentences=40, seed=2)
    cfg = CbowConfig(dim=8, epochs=3, min_count=1, rng_seed=5)
    out = {}
    for name in ("numba", "numpy"):
        prev = _accel.set_backend(name)
        try:
            out[name] = train_cbow(sentences, cfg).vectors
        finally:
            _accel.set_backend(prev)
    np.testing.assert_allclose(out["numba"], out["numpy"], rtol=1e-9, atol=1e-12)


def test_seeded_training_bit_reproducible(backend):
    sentences, _, _ = make_two_topic_corpus(n_sentences=60, seed=1)
    cfg = CbowConfig(dim=8, epochs=4, min_count=1, rng_seed=99)
    v1 = train_cbow(sentences, cfg).vectors
    v2 = train_cbow(sentences, cfg).vectors
    assert np.array_equal(v1, v2)


def test_zero_epochs_keeps_initialisation():
    sentences, _, _ = make_two_topic_corpus(n_sentences=20, seed=1)
    cfg = CbowConfig(dim=6, epochs=0, min_count=1, rng_seed=4)
    store = train_cbow(sentences, cfg)
    init, _ = init_vectors(len(store), 6, np.random.default_rng(4))
    assert np.array_equal(store.vectors, init)


def test_corpus_smaller_than_window():
    with pytest.raises(TrainingError):
        train_cbow([ts("a", "b")], CbowConfig(dim=4, window=5, min_count=1))


def test_word2vec_text_format(tmp_path):
    p = tmp_path / "vec.txt"
    p.write_text("2 3\nfood 0.1 0.2 0.3\nstaff -1 0 2.5\n", encoding="utf-8")
    store = load_word2vec_text(p)
    assert len(store) == 2 and store.dim == 3
    assert store.vocab.words == ("food", "staff")
    np.testing.assert_array_equal(store["staff"], [-1.0, 0.0, 2.5])

    p.write_text("2 3\nfood 0.1 0.2 0.3\nstaff -1 0\n", encoding="utf-8")
    with pytest.raises(ParseError) as info:
        load_word2vec_text(p)
    assert info.value.line == 3


def test_word2vec_round_trip(tmp_path, rng):
    vocab = Vocabulary(tuple(f"w{i}" for i in range(7)))
    store = EmbeddingStore(vocab, rng.normal(size=(7, 5)))
    save_word2vec_text(store, tmp_path / "a.txt")
    loaded = load_word2vec_text(tmp_path / "a.txt")
    expected = np.vectorize(lambda v: float("%.6g" % v))(store.vectors)
    assert np.array_equal(loaded.vectors, expected)
    save_word2vec_text(loaded, tmp_path / "b.txt")
    assert np.array_equal(load_word2vec_text(tmp_path / "b.txt").vectors, loaded.vectors)
    assert (tmp_path / "a.txt").read_text() == (tmp_path / "b.txt").read_text()


@pytest.fixture
def small_store():
    vocab = Vocabulary(("food", "staff", "menu"))
    return EmbeddingStore(vocab, np.array([[1.0, 2.0], [3.0, -4.0], [0.5, 0.5]]))


def test_sentence_vector(small_store):
    np.testing.assert_array_equal(sentence_vector(ts("food"), small_store), [1.0, 2.0])
    np.testing.assert_array_equal(sentence_vector(ts("food", "staff"), small_store), [2.0, -1.0])
    np.testing.assert_array_equal(sentence_vector(ts("food", "oov"), small_store), [1.0, 2.0])
    assert sentence_vector(ts("nope", "never"), small_store) is None
    assert sentence_vector(ts(), small_store) is None


@given(st.permutations(["food", "staff", "menu", "food", "oov"]))
def test_sentence_vector_permutation_invariant(tokens):
    vocab = Vocabulary(("food", "staff", "menu"))
    store = EmbeddingStore(vocab, np.array([[1.0, 2.0], [3.0, -4.0], [0.5, 0.5]]))
    np.testing.assert_allclose(sentence_vector(TokenizedSentence(tokens), store),
                               [5.5 / 4, 0.5 / 4], rtol=0, atol=1e-15)
