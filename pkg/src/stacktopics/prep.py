"""Text normalization, tokenization and sentence splitting.

Each document keeps two views. ``text`` is lowercase running text that still
contains stop words and sentence punctuation, so summaries read naturally.
``tokens`` is the stop-word filtered, stemmed word list used for topic
statistics.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from .ingest import StrippedText
from .porter import stem

__all__ = [
    "CleanDocument",
    "load_stopwords",
    "normalize",
    "normalize_text",
    "tokenize",
    "sentence_spans",
    "split_sentences",
    "stem",
]

MIN_SENTENCE_WORDS = 3

_APOSTROPHES = re.compile(r"['’`]")
_DIGITS = re.compile(r"[0-9]+(?:[.,][0-9]+)*")
_SPECIAL = re.compile(r"[^a-z.!?\s]")
# A terminator run counts only when it closes a word; all other punctuation
# becomes a space.
_TERMINATORS = re.compile(r"(?<=[a-z])([.!?])[.!?]*(?=\s|$)|[.!?]+")
_WS = re.compile(r"\s+")
_WORD = re.compile(r"[a-z]+")
_SPLIT = re.compile(r"[.!?](?=\s|$)|\n+")


@dataclass
class CleanDocument:
    post_id: int
    text: str
    tokens: list[str]
    sentence_spans: list[tuple[int, int]] = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return not self.tokens

    def sentences(self) -> list[str]:
        return [self.text[s:e] for s, e in self.sentence_spans]


def _read_stopwords(lines) -> frozenset:
    words = set()
    for line in lines:
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line.lower())
    return frozenset(words)


@lru_cache(maxsize=8)
def load_stopwords(path: str | None = None) -> frozenset:
    """Load a stop-word list; ``None`` selects the bundled 175-word list."""
    if path is None:
        text = resources.files("stacktopics").joinpath("data/stopwords_en.txt").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return _read_stopwords(text.splitlines())


def normalize_text(raw: str) -> str:
    """Lowercase ``raw`` and reduce it to letters, spaces and sentence ends.

    Apostrophes are dropped so that contractions fuse ("don't" -> "dont"),
    digits are deleted, and any other punctuation or special character
    becomes a single space.
    """
    text = raw.lower()
    text = _APOSTROPHES.sub("", text)
    text = _DIGITS.sub("", text)
    text = _SPECIAL.sub(" ", text)
    text = _TERMINATORS.sub(lambda m: m.group(1) or " ", text)
    return _WS.sub(" ", text).strip()


def tokenize(text: str, stopwords: frozenset | None = None) -> list[str]:
    """Stemmed content tokens of already-normalized (or any) text."""
    if stopwords is None:
        stopwords = load_stopwords()
    tokens = []
    for word in _WORD.findall(text.lower()):
        if len(word) < 2 or word in stopwords:
            continue
        stemmed = stem(word)
        if len(stemmed) >= 2 and stemmed not in stopwords:
            tokens.append(stemmed)
    return tokens


def sentence_spans(text: str) -> list[tuple[int, int]]:
    """``(start, end)`` offsets of the sentences in ``text``.

    Sentences end at ``.``, ``!`` or ``?`` followed by whitespace, or at a
    newline run; the terminator itself is excluded. A sentence with fewer
    than three words is merged into the next one (the last one into the
    previous), keeping the original separators.
    """
    pieces = []
    pos = 0
    for m in _SPLIT.finditer(text):
        pieces.append((pos, m.start()))
        pos = m.end()
    pieces.append((pos, len(text)))
    spans = []
    for s, e in pieces:
        seg = text[s:e]
        if not seg.strip():
            continue
        s += len(seg) - len(seg.lstrip())
        e -= len(seg) - len(seg.rstrip())
        spans.append((s, e))

    merged: list[tuple[int, int]] = []
    start = None
    for s, e in spans:
        if start is None:
            start = s
        if len(text[start:e].split()) >= MIN_SENTENCE_WORDS:
            merged.append((start, e))
            start = None
    if start is not None:
        end = spans[-1][1]
        if merged:
            merged[-1] = (merged[-1][0], end)
        else:
            merged.append((start, end))
    return merged


def split_sentences(text: str) -> list[str]:
    """Split text into sentences; see :func:`sentence_spans` for the rules."""
    return [text[s:e] for s, e in sentence_spans(text)]


def normalize(raw: StrippedText, stopwords: frozenset | None = None) -> CleanDocument:
    """Turn code-stripped post text into a :class:`CleanDocument`."""
    text = normalize_text(raw.text)
    return CleanDocument(
        post_id=raw.post_id,
        text=text,
        tokens=tokenize(text, stopwords),
        sentence_spans=sentence_spans(text),
    )
