import pytest
from hypothesis import given, strategies as st

from softaspect.preprocess import (StopwordSet, TokenizedSentence, load_stopwords,
                                   parse_stopwords, split_words, tokenize)


def test_tokenize_removes_stopwords_and_punctuation():
    stop = StopwordSet(frozenset({"the", "was"}))
    assert tokenize("The food was delicious!", stop).tokens == ("food", "delicious")


def test_tokenize_empty():
    assert tokenize("", StopwordSet()).tokens == ()


def test_tokenize_splits_on_hyphen_and_comma():
    assert tokenize("Wine-list prices, WOW.", StopwordSet()).tokens == ("wine", "list", "prices", "wow")


def test_numeric_tokens_dropped_alphanumeric_kept():
    assert split_words("Paid 20 dollars for 2x4 combo") == ["paid", "dollars", "for", "2x4", "combo"]


def test_contractions_split_and_removed_by_default_list():
    stop = load_stopwords()
    assert tokenize("I don't like it", stop).tokens == ("like",)


def test_bundled_stopword_list():
    stop = load_stopwords()
    assert len(stop) == 179
    for w in ("not", "no", "the", "wouldn't", "ourselves"):
        assert w in stop
    assert "food" not in stop


def test_stopword_file_comments(tmp_path):
    p = tmp_path / "stop.txt"
    p.write_text("# header\nthe\n\nA  # trailing comment\n", encoding="utf-8")
    assert load_stopwords(p).words == frozenset({"the", "a"})


def test_stopword_set_rejects_uppercase():
    with pytest.raises(ValueError):
        StopwordSet(frozenset({"The"}))


def test_source_id_and_custom_splitter():
    out = tokenize("a b", StopwordSet(), source_id="x1", splitter=str.split)
    assert out == TokenizedSentence(("a", "b"), "x1")


_STOP = load_stopwords()


@given(st.text(max_size=200))
def test_tokenize_idempotent_and_stopword_free(text):
    first = tokenize(text, _STOP)
    assert tokenize(" ".join(first.tokens), _STOP).tokens == first.tokens
    assert not set(first.tokens) & _STOP.words
    assert all(t and not any(c.isspace() for c in t) for t in first.tokens)
    assert tokenize(text, _STOP) == first


def test_parse_stopwords_lowercases():
    assert parse_stopwords(["And", "OR"]).words == frozenset({"and", "or"})
