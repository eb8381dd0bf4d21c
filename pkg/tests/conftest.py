import numpy as np
import pytest

from softaspect import _accel
from softaspect.corpus_io import load_seed_lexicon

BACKENDS = ["numba", "numpy"] if _accel.HAS_NUMBA else ["numpy"]


@pytest.fixture(params=BACKENDS)
def backend(request):
    """Run the test once per kernel backend."""
    previous = _accel.set_backend(request.param)
    yield request.param
    _accel.set_backend(previous)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def lexicon():
    return load_seed_lexicon()


# -- acceptance summary -----------------------------------------------------

_acceptance = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call" or report.outcome != "passed":
        if report.outcome == "failed" or name not in _acceptance:
            _acceptance[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance):
        status = {"passed": "PASS", "failed": "FAIL"}.get(_acceptance[name], _acceptance[name].upper())
        terminalreporter.write_line(f"{status:5s} {name}")


# -- small trained pipeline shared by the evaluation tests ------------------

@pytest.fixture(scope="session")
def small_pipeline():
    """Embeddings, kernel and tokenized splits for a small synthetic corpus."""
    from softaspect.embedding import CbowConfig, train_cbow
    from softaspect.preprocess import load_stopwords, tokenize
    from softaspect.similarity import build_term_similarity
    from softaspect.synthetic import make_review_corpus

    corpus = make_review_corpus(n_unlabeled=200, n_labeled=60, seed=3)
    stop = load_stopwords()
    unlabeled = [tokenize(s.text, stop, s.id) for s in corpus.unlabeled]
    labeled = [tokenize(s.text, stop, s.id) for s in corpus.labeled]
    store = train_cbow(unlabeled + labeled, CbowConfig(dim=20, epochs=30, min_count=1, rng_seed=1))
    S = build_term_similarity(store)
    return corpus, unlabeled, labeled, store, S
