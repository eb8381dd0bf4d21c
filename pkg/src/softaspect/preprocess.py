"""Tokenisation and stopword removal."""
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, List, Optional

_WORD_RE = re.compile(r"[^\W_]+")

DEFAULT_STOPWORDS_RESOURCE = "stopwords_en.txt"


@dataclass(frozen=True)
class StopwordSet:
    words: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        words = frozenset(self.words)
        for w in words:
            if not w or w != w.lower():
                raise ValueError(f"stopwords must be non-empty lowercase strings, got {w!r}")
        object.__setattr__(self, "words", words)

    def __contains__(self, word):
        return word in self.words

    def __len__(self):
        return len(self.words)


@dataclass(frozen=True)
class TokenizedSentence:
    tokens: tuple
    source_id: str = ""

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))

    def __len__(self):
        return len(self.tokens)


def split_words(text: str) -> List[str]:
    """Default splitting policy.

    Splits on every non-alphanumeric character, lowercases, and drops purely
    numeric pieces.  ``"don't"`` therefore becomes ``["don", "t"]``.
    """
    return [w for w in _WORD_RE.findall(text.lower()) if not w.isdigit()]


def parse_stopwords(lines: Iterable[str]) -> StopwordSet:
    words = set()
    for line in lines:
        line = line.split("#", 1)[0].strip()
        if line:
            words.add(line.lower())
    return StopwordSet(frozenset(words))


def load_stopwords(path=None) -> StopwordSet:
    """Read a one-word-per-line list; ``None`` loads the bundled English list."""
    if path is None:
        text = resources.files("softaspect.data").joinpath(DEFAULT_STOPWORDS_RESOURCE).read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return parse_stopwords(text.splitlines())


def tokenize(text: str, stopwords: Optional[StopwordSet] = None, source_id: str = "",
             splitter: Callable[[str], List[str]] = split_words) -> TokenizedSentence:
    stop = stopwords.words if stopwords is not None else frozenset()
    tokens = [t for t in splitter(text) if t and t not in stop]
    return TokenizedSentence(tuple(tokens), source_id)
