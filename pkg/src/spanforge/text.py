"""Tokenization with character-offset tracking and answer normalization.

Character offsets are Unicode scalar-value indices (what public QA corpora
use for answer_start), never bytes or UTF-16 units.
"""

from __future__ import annotations

import re
import string
import unicodedata
from dataclasses import dataclass

SPACE_DELIMITED = "space_delimited"
CJK = "cjk"

# Closed whitespace set shared with conforming reimplementations; do not use
# str.isspace()/regex \s, their definitions differ across runtimes.
_WHITESPACE = frozenset(
    " \t\n\r\f\v  "
    "           "
    "    　"
)

_ASCII_PUNCT = frozenset(string.punctuation)

_EN_ARTICLES = re.compile(r"\b(a|an|the)\b")
_FR_ARTICLES = re.compile(r"\b(le|la|les|un|une|des|du|de)\b")


def is_space(ch: str) -> bool:
    return ch in _WHITESPACE


def is_punct(ch: str) -> bool:
    return ch in _ASCII_PUNCT or unicodedata.category(ch).startswith("P")


@dataclass(frozen=True)
class TokenizedText:
    tokens: tuple[str, ...]
    offsets: tuple[tuple[int, int], ...]  # (char_start, char_end) per token
    language_class: str


def language_class(language: str) -> str:
    return CJK if language == "zh" else SPACE_DELIMITED


def _space_chunks(text: str) -> list[tuple[int, int]]:
    chunks = []
    start = None
    for i, ch in enumerate(text):
        if is_space(ch):
            if start is not None:
                chunks.append((start, i))
                start = None
        elif start is None:
            start = i
    if start is not None:
        chunks.append((start, len(text)))
    return chunks


def _peel(text: str, s: int, e: int) -> list[tuple[str, int, int]]:
    # split leading/trailing punctuation of a whitespace chunk into own tokens
    i, j = s, e
    lead = []
    while i < j and is_punct(text[i]):
        lead.append((text[i], i, i + 1))
        i += 1
    trail = []
    while j > i and is_punct(text[j - 1]):
        trail.append((text[j - 1], j - 1, j))
        j -= 1
    mid = [(text[i:j], i, j)] if j > i else []
    return lead + mid + list(reversed(trail))


def tokenize(text: str, language: str) -> TokenizedText:
    """Language-aware tokens plus exact source offsets.

    zh: one token per non-space character. ko: whitespace-delimited eojeol.
    Everything else: whitespace split with leading/trailing punctuation
    separated into their own tokens.
    """
    if language == "zh":
        toks, offs = [], []
        for i, ch in enumerate(text):
            if is_space(ch):
                continue
            toks.append(ch)
            offs.append((i, i + 1))
        return TokenizedText(tuple(toks), tuple(offs), CJK)
    chunks = _space_chunks(text)
    if language == "ko":
        pieces = [(text[s:e], s, e) for s, e in chunks]
    else:
        pieces = []
        for s, e in chunks:
            pieces.extend(_peel(text, s, e))
    return TokenizedText(
        tuple(p[0] for p in pieces),
        tuple((p[1], p[2]) for p in pieces),
        SPACE_DELIMITED,
    )


def _strip_punct(text: str) -> str:
    return "".join(ch for ch in text if not is_punct(ch))


def _collapse(text: str) -> str:
    words = []
    cur = []
    for ch in text:
        if is_space(ch):
            if cur:
                words.append("".join(cur))
                cur = []
        else:
            cur.append(ch)
    if cur:
        words.append("".join(cur))
    return " ".join(words)


def normalize_answer(text: str, language: str) -> str:
    """Lowercase, strip punctuation, drop articles (en/fr), collapse spaces.

    The en path mirrors the conventional SQuAD evaluation normalization;
    fr extends it with the French article list, zh/ko only lowercase and
    strip punctuation.
    """
    t = text.lower()
    if language == "fr":
        t = t.replace("l'", " ")
        t = _strip_punct(t)
        t = _FR_ARTICLES.sub(" ", t)
    elif language == "en":
        t = _strip_punct(t)
        t = _EN_ARTICLES.sub(" ", t)
    else:
        t = _strip_punct(t)
    return _collapse(t)


def answer_tokens(normalized: str, language: str) -> list[str]:
    """Token units for F1 overlap: characters for zh/ko, words otherwise."""
    if language in ("zh", "ko"):
        return [ch for ch in normalized if not is_space(ch)]
    return normalized.split(" ") if normalized else []
