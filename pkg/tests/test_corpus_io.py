import json

import pytest
from hypothesis import given, settings, strategies as st

from softaspect.corpus_io import (LabeledSentence, SeedLexicon, SentenceFilter, ingest_unlabeled,
                                  load_seed_lexicon, parse_labeled_corpus, parse_seed_lexicon,
                                  save_seed_lexicon, split_sentences, write_labeled_jsonl,
                                  write_semeval_xml)
from softaspect.errors import ParseError, ValidationError

SEMEVAL = """<?xml version="1.0" encoding="UTF-8"?>
<sentences>
  <sentence id="3121">
    <text>the food was great but service slow</text>
    <aspectTerms><aspectTerm term="food" polarity="positive" from="4" to="8"/></aspectTerms>
    <aspectCategories>
      <aspectCategory category="food" polarity="positive"/>
      <aspectCategory category="service" polarity="negative"/>
    </aspectCategories>
  </sentence>
  <sentence id="2777">
    <text>We went there on a Tuesday.</text>
    <aspectCategories><aspectCategory category="anecdotes/miscellaneous" polarity="neutral"/></aspectCategories>
  </sentence>
</sentences>
"""


def test_semeval_multi_label(tmp_path):
    p = tmp_path / "test.xml"
    p.write_text(SEMEVAL, encoding="utf-8")
    out = parse_labeled_corpus(p, "semeval_xml")
    assert [s.id for s in out] == ["3121", "2777"]
    assert out[0].text == "the food was great but service slow"
    assert out[0].gold_categories == {"food", "service"}
    assert out[1].gold_categories == {"anecdotes/miscellaneous"}


def test_empty_file_gives_empty_list(tmp_path):
    p = tmp_path / "empty.xml"
    p.write_text("", encoding="utf-8")
    assert parse_labeled_corpus(p, "semeval_xml") == []
    assert parse_labeled_corpus(p, "jsonl") == []


def test_malformed_xml_names_line(tmp_path):
    p = tmp_path / "bad.xml"
    p.write_text("<sentences>\n<sentence id='1'>\n<text>x</sentence>\n", encoding="utf-8")
    with pytest.raises(ParseError) as info:
        parse_labeled_corpus(p, "semeval_xml")
    assert info.value.line == 3
    assert "line 3" in str(info.value)


def test_sentence_without_category_names_id(tmp_path):
    p = tmp_path / "nocat.xml"
    p.write_text('<sentences><sentence id="s9"><text>hi</text></sentence></sentences>', encoding="utf-8")
    with pytest.raises(ValidationError, match="s9"):
        parse_labeled_corpus(p, "semeval_xml")


def test_jsonl_errors(tmp_path):
    p = tmp_path / "bad.jsonl"
    p.write_text('{"id": "a", "text": "x", "categories": ["food"]}\n{oops\n', encoding="utf-8")
    with pytest.raises(ParseError) as info:
        parse_labeled_corpus(p, "jsonl")
    assert info.value.line == 2
    p.write_text('{"id": "a", "text": "x", "categories": []}\n', encoding="utf-8")
    with pytest.raises(ValidationError, match="'a'"):
        parse_labeled_corpus(p, "jsonl")


def test_category_universe_check(tmp_path, lexicon):
    p = tmp_path / "c.jsonl"
    p.write_text('{"id": "a", "text": "x", "categories": ["drinks"]}\n', encoding="utf-8")
    with pytest.raises(ValidationError, match="drinks"):
        parse_labeled_corpus(p, "jsonl", categories=lexicon.universe)


_labels = st.frozensets(st.sampled_from(["food", "service", "price", "ambience",
                                         "anecdotes/miscellaneous"]), min_size=1)
_text = st.text(alphabet=st.characters(blacklist_categories=("Cs", "Cc", "Cn", "Co")), min_size=1, max_size=40)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(_text, _labels), max_size=6))
def test_round_trip_jsonl_and_xml(tmp_path_factory, rows):
    d = tmp_path_factory.mktemp("rt")
    sentences = [LabeledSentence(f"id{i}", text.strip() or "x", labels)
                 for i, (text, labels) in enumerate(rows)]
    write_labeled_jsonl(sentences, d / "a.jsonl")
    assert parse_labeled_corpus(d / "a.jsonl", "jsonl") == sentences
    write_semeval_xml(sentences, d / "a.xml")
    back = parse_labeled_corpus(d / "a.xml", "semeval_xml")
    write_labeled_jsonl(back, d / "b.jsonl")
    assert parse_labeled_corpus(d / "b.jsonl", "jsonl") == back
    assert [s.gold_categories for s in back] == [s.gold_categories for s in sentences]


def test_default_lexicon_matches_seed_table():
    lex = load_seed_lexicon()
    assert lex.names == ("food", "service", "price", "ambience")
    assert lex.fallback_category == "anecdotes/miscellaneous"
    assert dict(lex.categories) == {
        "food": ("food", "delicious", "menu", "fresh", "tasty"),
        "service": ("service", "staff", "friendly", "attentive", "manager"),
        "price": ("price", "cheap", "expensive", "money", "affordable"),
        "ambience": ("ambience", "atmosphere", "decor", "romantic", "loud"),
    }
    assert len(lex.all_seeds()) == 20


def test_lexicon_duplicate_category():
    text = '{"fallback": "misc", "categories": {"price": ["cheap"], "price": ["money"]}}'
    with pytest.raises(ValidationError, match="duplicate category"):
        parse_seed_lexicon(text)


def test_lexicon_cross_category_seed():
    text = '{"fallback": "misc", "categories": {"price": ["cheap"], "food": ["cheap", "menu"]}}'
    with pytest.raises(ValidationError, match="cheap"):
        parse_seed_lexicon(text)


def test_lexicon_empty_seed_list_and_fallback_clash():
    with pytest.raises(ValidationError, match="empty"):
        parse_seed_lexicon('{"fallback": "misc", "categories": {"price": []}}')
    with pytest.raises(ValidationError, match="fallback"):
        SeedLexicon((("misc", ("a",)),), "misc")


def test_lexicon_save_load(tmp_path, lexicon):
    save_seed_lexicon(lexicon, tmp_path / "lex.json")
    assert load_seed_lexicon(tmp_path / "lex.json") == lexicon


def test_ingest_filter(tmp_path, lexicon):
    p = tmp_path / "reviews.txt"
    p.write_text("The food was amazing. We sat outside.\n"
                 "Great value for money\n"
                 "Service was slow; food cold.\n", encoding="utf-8")
    out = ingest_unlabeled(p, SentenceFilter.from_lexicon(lexicon))
    assert [s.text for s in out] == ["The food was amazing.", "Service was slow; food cold."]
    flt = SentenceFilter.from_lexicon(lexicon)
    assert all(flt(s.text) for s in out)


def test_ingest_jsonl_and_empty_result(tmp_path, lexicon, caplog):
    p = tmp_path / "reviews.jsonl"
    p.write_text(json.dumps({"review_id": "r1", "text": "Nice PRICE! Bad decor."}) + "\n",
                 encoding="utf-8")
    out = ingest_unlabeled(p, SentenceFilter.from_lexicon(lexicon))
    assert [(s.id, s.text) for s in out] == [("r1:0", "Nice PRICE!")]
    p.write_text("Nothing relevant here.\n", encoding="utf-8")
    with caplog.at_level("WARNING"):
        assert ingest_unlabeled(p, SentenceFilter.from_lexicon(lexicon)) == []
    assert "no sentences survived" in caplog.text


def test_filter_whole_tokens_only():
    flt = SentenceFilter(frozenset({"food"}))
    assert not flt("Seafood galore")
    assert not flt("foods everywhere")
    assert flt("FOOD!")


def test_split_sentences():
    assert split_sentences('Good. "Really" good! ok. Fine? Yes') == ['Good.', '"Really" good! ok.',
                                                                     'Fine?', 'Yes']
