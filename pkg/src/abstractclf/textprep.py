"""Tokenization, normalization and rule-based sentence splitting."""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .porter import stem as porter_stem

STOPWORDS_VERSION = "en-179-v1"


@dataclass(frozen=True)
class TokenizedDoc:
    doc_id: str
    tokens: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        for tok in self.tokens:
            if not tok or any(ch.isspace() for ch in tok):
                raise ValueError(f"invalid token {tok!r} in document {self.doc_id!r}")


@dataclass(frozen=True)
class Sentence:
    doc_id: str
    index: int
    text: str
    token_count: int


def load_stopwords(path=None) -> frozenset[str]:
    """One token per line, UTF-8. Defaults to the bundled 179-word English list."""
    if path is None:
        raw = resources.files("abstractclf").joinpath("data/stopwords_en.txt").read_text("utf-8")
    else:
        raw = Path(path).read_text(encoding="utf-8")
    return frozenset(line.strip().lower() for line in raw.splitlines() if line.strip())


DEFAULT_STOPWORDS = load_stopwords()


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _strip_punct(tok: str) -> str:
    start, end = 0, len(tok)
    while start < end and _is_punct(tok[start]):
        start += 1
    while end > start and _is_punct(tok[end - 1]):
        end -= 1
    return tok[start:end]


def tokenize(text: str) -> list[str]:
    tokens = (_strip_punct(t) for t in text.split())
    return [t for t in tokens if t]


def _stem_fixed_point(tok: str) -> str:
    # Porter output is not always a fixed point ("agreed" -> "agre" -> "agr")
    for _ in range(8):
        nxt = porter_stem(tok)
        if nxt == tok:
            break
        tok = nxt
    return tok


def normalize(tokens: Iterable[str], stopwords: frozenset[str] = DEFAULT_STOPWORDS,
              stem: bool = True) -> list[str]:
    """Lowercase, drop stopwords, optionally stem.

    Stopwords are filtered again after stemming so that the result is a fixed
    point of this function.
    """
    out = []
    for tok in tokens:
        tok = tok.lower()
        if tok in stopwords:
            continue
        if stem:
            tok = _stem_fixed_point(tok)
            if not tok or tok in stopwords:
                continue
        out.append(tok)
    return out


def preprocess(text: str, stopwords: frozenset[str] = DEFAULT_STOPWORDS,
               stem: bool = True, doc_id: str = "") -> TokenizedDoc:
    return TokenizedDoc(doc_id, tuple(normalize(tokenize(text), stopwords, stem)))


_BOUNDARY = re.compile(r"[.!?](\s+)")


def split_sentences(text: str, doc_id: str = "") -> list[Sentence]:
    """Split at '.', '!' or '?' followed by whitespace and an uppercase letter or digit.

    Newlines are turned into spaces first. Abbreviations get no special treatment.
    """
    text = text.replace("\r", " ").replace("\n", " ")
    pieces = []
    start = 0
    for m in _BOUNDARY.finditer(text):
        nxt = m.end()
        if nxt < len(text) and (text[nxt].isupper() or text[nxt].isdigit()):
            pieces.append(text[start:m.start() + 1])
            start = nxt
    pieces.append(text[start:])
    sentences = []
    for piece in pieces:
        piece = piece.strip()
        if piece:
            sentences.append(Sentence(doc_id, len(sentences), piece, len(tokenize(piece))))
    return sentences


def join_tokens(tokens: Sequence[str]) -> str:
    return " ".join(tokens)
