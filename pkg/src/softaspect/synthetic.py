"""Synthetic review corpora with known ground truth.

Each category owns its seed words plus topic-correlated filler words; a
sentence mentions one or two categories and is padded with generic words.
Sentences built from generic words only carry the fallback label.
"""
from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np

from .corpus_io import LabeledSentence, SeedLexicon, UnlabeledSentence, load_seed_lexicon
from .preprocess import TokenizedSentence

TOPIC_FILLER: Dict[str, Sequence[str]] = {
    "food": ("pasta", "pizza", "sushi", "steak", "dessert", "sauce", "dish", "flavor",
             "burger", "salad"),
    "service": ("waiter", "waitress", "server", "host", "rude", "polite", "helpful",
                "waited", "greeted", "hostess"),
    "price": ("bill", "cost", "value", "worth", "overpriced", "dollars", "pricey", "deal",
              "budget", "paid"),
    "ambience": ("music", "lighting", "cozy", "noisy", "decoration", "interior", "vibe",
                 "seating", "crowded", "quiet"),
}

GENERIC = ("place", "really", "great", "good", "time", "restaurant", "night", "went",
           "definitely", "back", "also", "came", "friends", "dinner", "would", "recommend",
           "nice", "visit", "love", "try")


@dataclass
class SyntheticCorpus:
    lexicon: SeedLexicon
    unlabeled: List[UnlabeledSentence]
    labeled: List[LabeledSentence]


def _render(words):
    text = " ".join(words)
    return text[:1].upper() + text[1:] + "."


def _topic_words(lexicon, name):
    return tuple(lexicon.seeds(name)) + tuple(TOPIC_FILLER[name])


def make_review_corpus(n_unlabeled=400, n_labeled=100, seed=0, lexicon=None,
                       p_two_categories=0.15, p_fallback=0.2) -> SyntheticCorpus:
    """Four-category restaurant-style corpus.

    Unlabeled sentences always contain at least one category name so they pass
    the ingestion filter.  Labeled sentences draw topic words from the whole
    topic list (seeds and filler), so most never mention a seed directly.
    """
    lexicon = lexicon or load_seed_lexicon()
    rng = np.random.default_rng(seed)
    names = list(lexicon.names)

    def topic_sentence(cats, with_name):
        words = []
        for c in cats:
            pool = _topic_words(lexicon, c)
            words += list(rng.choice(pool, size=rng.integers(2, 4), replace=False))
            if with_name:
                words.append(c)
        words += list(rng.choice(GENERIC, size=rng.integers(2, 5), replace=False))
        rng.shuffle(words)
        return words

    def pick_categories():
        n = 2 if rng.random() < p_two_categories else 1
        return sorted(rng.choice(names, size=n, replace=False).tolist())

    unlabeled = []
    for i in range(n_unlabeled):
        unlabeled.append(UnlabeledSentence(f"u{i}", _render(topic_sentence(pick_categories(), True))))

    labeled = []
    for i in range(n_labeled):
        if rng.random() < p_fallback:
            words = list(rng.choice(GENERIC, size=rng.integers(4, 7), replace=False))
            gold = {lexicon.fallback_category}
        else:
            cats = pick_categories()
            words = topic_sentence(cats, False)
            gold = set(cats)
        labeled.append(LabeledSentence(f"t{i}", _render(words), frozenset(gold)))
    return SyntheticCorpus(lexicon, unlabeled, labeled)


def make_two_topic_corpus(n_sentences=200, seed=0, topic_size=10, length=(6, 9)):
    """Sentences drawn from one of two disjoint word sets.

    Returns ``(sentences, topic_a_words, topic_b_words)``.
    """
    rng = np.random.default_rng(seed)
    topic_a = tuple(f"alpha{i}" for i in range(topic_size))
    topic_b = tuple(f"beta{i}" for i in range(topic_size))
    sentences = []
    for i in range(n_sentences):
        pool = topic_a if i % 2 == 0 else topic_b
        n = int(rng.integers(length[0], length[1] + 1))
        sentences.append(TokenizedSentence(tuple(rng.choice(pool, size=n)), f"s{i}"))
    return sentences, topic_a, topic_b
