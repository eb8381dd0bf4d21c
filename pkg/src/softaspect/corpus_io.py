"""Reading and writing corpora and the seed lexicon.

Formats:

* SemEval-2014 ABSA XML (read only): ``<sentences><sentence id=..><text>..</text>
  <aspectCategories><aspectCategory category=".."/>...``
* labeled JSON lines: ``{"id": .., "text": .., "categories": [..]}`` per line
* seed lexicon JSON: ``{"fallback": .., "categories": {name: [seed, ...]}}``
* unlabeled reviews: one document per line, JSON with a ``text`` field or plain text
"""
import json
import logging
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

from .errors import ParseError, ValidationError
from .preprocess import split_words

logger = logging.getLogger(__name__)

DEFAULT_LEXICON_RESOURCE = "seed_lexicon.json"

_SENTENCE_BOUNDARY = re.compile(r"(?<=[.!?])\s+(?=[\"'“‘A-Z])")


@dataclass(frozen=True)
class LabeledSentence:
    id: str
    text: str
    gold_categories: frozenset

    def __post_init__(self):
        object.__setattr__(self, "gold_categories", frozenset(self.gold_categories))
        if not self.gold_categories:
            raise ValidationError(f"sentence {self.id!r} has no category annotations")


@dataclass(frozen=True)
class UnlabeledSentence:
    id: str
    text: str

    def __post_init__(self):
        if not self.text.strip():
            raise ValidationError(f"unlabeled sentence {self.id!r} is empty")


@dataclass(frozen=True)
class SeedLexicon:
    categories: tuple  # ((name, (seed, ...)), ...)
    fallback_category: str = "anecdotes/miscellaneous"

    def __post_init__(self):
        cats = tuple((str(name), tuple(seeds)) for name, seeds in self.categories)
        object.__setattr__(self, "categories", cats)
        names = [name for name, _ in cats]
        dup = {n for n in names if names.count(n) > 1}
        if dup:
            raise ValidationError(f"duplicate category: {sorted(dup)}")
        owner = {}
        for name, seeds in cats:
            if not seeds:
                raise ValidationError(f"category {name!r} has an empty seed list")
            for seed in seeds:
                if seed in owner and owner[seed] != name:
                    raise ValidationError(
                        f"seed {seed!r} listed under both {owner[seed]!r} and {name!r}")
                owner[seed] = name
        if self.fallback_category in names:
            raise ValidationError(f"fallback {self.fallback_category!r} is also a lexicon category")

    @property
    def names(self):
        return tuple(name for name, _ in self.categories)

    @property
    def universe(self):
        """Lexicon categories plus the fallback."""
        return self.names + (self.fallback_category,)

    def seeds(self, name):
        return dict(self.categories)[name]

    def all_seeds(self):
        return [s for _, seeds in self.categories for s in seeds]

    def to_json(self):
        return {"fallback": self.fallback_category,
                "categories": {name: list(seeds) for name, seeds in self.categories}}


@dataclass(frozen=True)
class SentenceFilter:
    """Keeps sentences containing at least one of ``words`` as a whole token."""
    words: frozenset

    @classmethod
    def from_lexicon(cls, lexicon: SeedLexicon):
        return cls(frozenset(n.lower() for n in lexicon.names))

    def __call__(self, text: str) -> bool:
        return any(tok in self.words for tok in split_words(text))


# -- seed lexicon -----------------------------------------------------------

def _no_duplicate_keys(pairs):
    seen = {}
    for key, value in pairs:
        if key in seen:
            raise ValidationError(f"duplicate category: {key!r}")
        seen[key] = value
    return seen


def parse_seed_lexicon(text: str) -> SeedLexicon:
    try:
        raw = json.loads(text, object_pairs_hook=_no_duplicate_keys)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid lexicon JSON: {exc.msg}", exc.lineno, exc.colno) from exc
    if not isinstance(raw, dict) or "categories" not in raw:
        raise ValidationError("lexicon JSON must be an object with a 'categories' field")
    cats = raw["categories"]
    if not isinstance(cats, dict):
        raise ValidationError("'categories' must map category names to seed lists")
    fallback = raw.get("fallback", "anecdotes/miscellaneous")
    return SeedLexicon(tuple((name, tuple(seeds)) for name, seeds in cats.items()), fallback)


def load_seed_lexicon(path=None) -> SeedLexicon:
    """Load a lexicon file; ``None`` returns the bundled four-category default."""
    if path is None:
        text = resources.files("softaspect.data").joinpath(DEFAULT_LEXICON_RESOURCE).read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return parse_seed_lexicon(text)


def save_seed_lexicon(lexicon: SeedLexicon, path):
    Path(path).write_text(json.dumps(lexicon.to_json(), indent=2) + "\n", encoding="utf-8")


# -- labeled corpora --------------------------------------------------------

def _check_universe(sentences, categories):
    if categories is None:
        return
    allowed = set(categories)
    for s in sentences:
        extra = s.gold_categories - allowed
        if extra:
            raise ValidationError(f"sentence {s.id!r} has unknown categories {sorted(extra)}")


def _parse_semeval(path: Path) -> List[LabeledSentence]:
    try:
        root = ET.parse(path).getroot()
    except ET.ParseError as exc:
        line, col = exc.position
        raise ParseError(f"malformed XML in {path}", line, col) from exc
    out = []
    for elem in root.iter("sentence"):
        sid = elem.get("id", "")
        text_elem = elem.find("text")
        text = text_elem.text if text_elem is not None and text_elem.text else ""
        cats = [c.get("category") for c in elem.iter("aspectCategory") if c.get("category")]
        if not cats:
            raise ValidationError(f"sentence {sid!r} has no category annotations")
        out.append(LabeledSentence(sid, text, frozenset(cats)))
    return out


def _parse_jsonl(path: Path) -> List[LabeledSentence]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"malformed JSON in {path}: {exc.msg}", lineno, exc.colno) from exc
            try:
                sid, text, cats = str(obj["id"]), obj["text"], obj["categories"]
            except (KeyError, TypeError) as exc:
                raise ParseError(f"missing field {exc} in {path}", lineno) from exc
            if not cats:
                raise ValidationError(f"sentence {sid!r} has no category annotations")
            out.append(LabeledSentence(sid, text, frozenset(cats)))
    return out


def parse_labeled_corpus(path, format: str = "semeval_xml",
                         categories: Optional[Iterable[str]] = None) -> List[LabeledSentence]:
    """Parse a labeled evaluation corpus.

    ``format`` is ``"semeval_xml"`` or ``"jsonl"``.  An empty file yields an
    empty list.  When ``categories`` is given, every gold label must be in it.
    """
    path = Path(path)
    if path.stat().st_size == 0 or not path.read_text(encoding="utf-8").strip():
        return []
    if format == "semeval_xml":
        sentences = _parse_semeval(path)
    elif format == "jsonl":
        sentences = _parse_jsonl(path)
    else:
        raise ValueError(f"unknown labeled corpus format {format!r}")
    _check_universe(sentences, categories)
    return sentences


def write_labeled_jsonl(sentences: Sequence[LabeledSentence], path):
    with open(path, "w", encoding="utf-8") as fh:
        for s in sentences:
            fh.write(json.dumps({"id": s.id, "text": s.text,
                                 "categories": sorted(s.gold_categories)}, ensure_ascii=False))
            fh.write("\n")


def write_semeval_xml(sentences: Sequence[LabeledSentence], path):
    root = ET.Element("sentences")
    for s in sentences:
        el = ET.SubElement(root, "sentence", id=s.id)
        ET.SubElement(el, "text").text = s.text
        cats = ET.SubElement(el, "aspectCategories")
        for c in sorted(s.gold_categories):
            ET.SubElement(cats, "aspectCategory", category=c)
    ET.ElementTree(root).write(path, encoding="utf-8", xml_declaration=True)


# -- unlabeled reviews ------------------------------------------------------

def split_sentences(text: str) -> List[str]:
    """Split on ``.``/``!``/``?`` followed by whitespace and a capital or quote."""
    return [p.strip() for p in _SENTENCE_BOUNDARY.split(text.strip()) if p.strip()]


def _document_text(line: str, lineno: int):
    stripped = line.strip()
    if stripped.startswith("{"):
        try:
            obj = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed JSON review: {exc.msg}", lineno, exc.colno) from exc
        doc_id = obj.get("id", obj.get("review_id", str(lineno)))
        return str(doc_id), obj.get("text", "") or ""
    return str(lineno), stripped


def ingest_unlabeled(path, filter: Optional[SentenceFilter] = None) -> List[UnlabeledSentence]:
    """Split review documents into sentences and keep those passing ``filter``."""
    out = []
    n_total = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            doc_id, text = _document_text(line, lineno)
            for i, sent in enumerate(split_sentences(text)):
                n_total += 1
                if filter is None or filter(sent):
                    out.append(UnlabeledSentence(f"{doc_id}:{i}", sent))
    if not out:
        logger.warning("no sentences survived the filter in %s (%d seen)", path, n_total)
    else:
        logger.info("kept %d of %d sentences from %s", len(out), n_total, path)
    return out


def write_unlabeled(sentences: Sequence[UnlabeledSentence], path):
    with open(path, "w", encoding="utf-8") as fh:
        for s in sentences:
            fh.write(json.dumps({"id": s.id, "text": s.text}, ensure_ascii=False) + "\n")


def read_unlabeled(path) -> List[UnlabeledSentence]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            doc_id, text = _document_text(line, lineno)
            if text.strip():
                out.append(UnlabeledSentence(doc_id, text))
    return out
