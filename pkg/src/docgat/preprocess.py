"""Sentence splitting and token normalization for abstract text."""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources

from .stemming import stem

# Alphanumeric runs (underscore excluded); text is lowercased first.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

_SENTENCE_END = ".!?"


@lru_cache(maxsize=1)
def load_stopwords() -> frozenset[str]:
    """The bundled English stopword list, one word per line."""
    text = resources.files("docgat.data").joinpath("stopwords_en.txt").read_text("utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


def _dotted_abbreviation(text: str, i: int) -> bool:
    # Trailing period of a dotted single-letter abbreviation such as "e.g.":
    # the letter before the period is itself preceded by a period.
    return i >= 2 and text[i - 1].isalpha() and text[i - 2] == "."


def split_sentences(text: str) -> list[str]:
    """Split at '.', '!' or '?' followed by whitespace or end of text.

    Periods that close a dotted abbreviation ("e.g.", "i.e.") do not split.
    Empty segments are dropped; empty input yields an empty list.
    """
    sentences: list[str] = []
    start = 0
    n = len(text)
    for i, ch in enumerate(text):
        if ch not in _SENTENCE_END:
            continue
        if i + 1 < n and not text[i + 1].isspace():
            continue
        if ch == "." and _dotted_abbreviation(text, i):
            continue
        segment = text[start : i + 1].strip()
        if segment:
            sentences.append(segment)
        start = i + 1
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def tokenize(sentence: str, stopwords: frozenset[str] | None = None) -> list[str]:
    """Normalize a sentence into stemmed terms, order preserved.

    Lowercases, splits on non-alphanumeric runs, then drops tokens shorter
    than two characters, pure numbers, and stopwords. Tokens are filtered
    again after stemming so no stem reintroduces a stopword or a
    one-character term.
    """
    if stopwords is None:
        stopwords = load_stopwords()
    tokens: list[str] = []
    for raw in _TOKEN_RE.findall(sentence.lower()):
        if len(raw) < 2 or raw.isdigit() or raw in stopwords:
            continue
        stemmed = stem(raw)
        if len(stemmed) < 2 or stemmed in stopwords:
            continue
        tokens.append(stemmed)
    return tokens


def sentence_token_lists(text: str, stopwords: frozenset[str] | None = None) -> list[list[str]]:
    """Tokenize each sentence of a document."""
    return [tokenize(s, stopwords) for s in split_sentences(text)]
