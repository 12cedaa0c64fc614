"""N-gram TF-IDF features with a document-frequency floor."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .textprep import TokenizedDoc

FORMAT_NAME = "abstractclf.tfidf"
FORMAT_VERSION = 1


class VocabularyError(ValueError):
    pass


def ngrams(tokens: Sequence[str], min_n: int = 1, max_n: int = 1) -> list[str]:
    """All contiguous windows of min_n..max_n tokens, shorter windows first."""
    if min_n < 1:
        raise ValueError("min_n must be >= 1")
    tokens = list(tokens)
    out = []
    for n in range(min_n, max_n + 1):
        for i in range(len(tokens) - n + 1):
            out.append(" ".join(tokens[i:i + n]))
    return out


@dataclass(frozen=True)
class SparseVector:
    dimension: int
    indices: np.ndarray
    values: np.ndarray

    @classmethod
    def from_entries(cls, dimension: int, entries: dict[int, float]) -> "SparseVector":
        items = sorted((i, w) for i, w in entries.items() if w != 0.0)
        for i, w in items:
            if not 0 <= i < dimension:
                raise IndexError(f"index {i} out of range for dimension {dimension}")
            if not math.isfinite(w):
                raise ValueError("non-finite weight")
        idx = np.array([i for i, _ in items], dtype=np.int64)
        val = np.array([w for _, w in items], dtype=np.float64)
        return cls(dimension, idx, val)

    @property
    def entries(self) -> dict[int, float]:
        return dict(zip(self.indices.tolist(), self.values.tolist()))

    @property
    def nnz(self) -> int:
        return len(self.indices)

    def norm(self) -> float:
        return float(np.sqrt(np.dot(self.values, self.values)))

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dimension)
        out[self.indices] = self.values
        return out


@dataclass(frozen=True)
class Vocabulary:
    terms: dict[str, int]
    ngram_range: tuple[int, int]
    min_df_fraction: float

    @property
    def size(self) -> int:
        return len(self.terms)

    def ordered_terms(self) -> list[str]:
        return sorted(self.terms, key=self.terms.__getitem__)


@dataclass(frozen=True)
class TfidfModel:
    vocabulary: Vocabulary
    idf: np.ndarray
    corpus_doc_count: int

    @property
    def dimension(self) -> int:
        return self.vocabulary.size

    def transform(self, doc: TokenizedDoc | Sequence[str]) -> SparseVector:
        return transform(self, doc)

    def transform_many(self, docs) -> sp.csr_matrix:
        return transform_many(self, docs)

    def to_dict(self) -> dict:
        return {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "ngram_range": list(self.vocabulary.ngram_range),
            "min_df_fraction": self.vocabulary.min_df_fraction,
            "corpus_doc_count": self.corpus_doc_count,
            "terms": self.vocabulary.ordered_terms(),
            "idf": [float(x) for x in self.idf],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TfidfModel":
        if data.get("format") != FORMAT_NAME:
            raise ValueError(f"not a TF-IDF model: format={data.get('format')!r}")
        if data.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported TF-IDF model version {data.get('version')!r}")
        terms = {t: i for i, t in enumerate(data["terms"])}
        idf = np.asarray(data["idf"], dtype=np.float64)
        if len(idf) != len(terms):
            raise ValueError("idf length does not match vocabulary size")
        vocab = Vocabulary(terms, tuple(data["ngram_range"]), data["min_df_fraction"])
        return cls(vocab, idf, data["corpus_doc_count"])

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def save(self, path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "TfidfModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _tokens(doc) -> Sequence[str]:
    return doc.tokens if isinstance(doc, TokenizedDoc) else doc


def fit(docs: Sequence[TokenizedDoc], ngram_range: tuple[int, int] = (1, 4),
        min_df_fraction: float = 0.0005) -> TfidfModel:
    """Keep n-grams whose document frequency (as a fraction) is >= min_df_fraction.

    idf = ln((1 + N) / (1 + df)) + 1; indices follow lexicographic term order.
    """
    min_n, max_n = ngram_range
    if not 1 <= min_n <= max_n:
        raise ValueError(f"invalid ngram_range {ngram_range}")
    if not 0 < min_df_fraction <= 1:
        raise ValueError("min_df_fraction must be in (0, 1]")
    if len(docs) == 0:
        raise VocabularyError("cannot fit on an empty document collection")
    n_docs = len(docs)
    df = Counter()
    for doc in docs:
        df.update(set(ngrams(_tokens(doc), min_n, max_n)))
    kept = sorted(t for t, c in df.items() if c / n_docs >= min_df_fraction)
    if not kept:
        raise VocabularyError("empty vocabulary")
    terms = {t: i for i, t in enumerate(kept)}
    idf = np.array([math.log((1 + n_docs) / (1 + df[t])) + 1.0 for t in kept])
    return TfidfModel(Vocabulary(terms, (min_n, max_n), min_df_fraction), idf, n_docs)


def _weights(model: TfidfModel, tokens: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = model.vocabulary.ngram_range
    terms = model.vocabulary.terms
    counts = Counter(terms[g] for g in ngrams(tokens, lo, hi) if g in terms)
    if not counts:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    idx = np.array(sorted(counts), dtype=np.int64)
    raw = np.array([counts[i] for i in idx], dtype=np.float64) * model.idf[idx]
    return idx, raw / np.sqrt(np.dot(raw, raw))


def transform(model: TfidfModel, doc: TokenizedDoc | Sequence[str]) -> SparseVector:
    idx, val = _weights(model, _tokens(doc))
    return SparseVector(model.dimension, idx, val)


def transform_many(model: TfidfModel, docs) -> sp.csr_matrix:
    indptr = [0]
    indices, data = [], []
    for doc in docs:
        idx, val = _weights(model, _tokens(doc))
        indices.append(idx)
        data.append(val)
        indptr.append(indptr[-1] + len(idx))
    return sp.csr_matrix(
        (np.concatenate(data) if data else np.zeros(0),
         np.concatenate(indices) if indices else np.zeros(0, dtype=np.int64),
         np.array(indptr)),
        shape=(len(indptr) - 1, model.dimension),
    )


def stack(vectors: Sequence[SparseVector]) -> sp.csr_matrix:
    if not vectors:
        raise ValueError("no vectors to stack")
    dim = vectors[0].dimension
    if any(v.dimension != dim for v in vectors):
        raise ValueError("vectors have different dimensions")
    indptr = np.cumsum([0] + [v.nnz for v in vectors])
    return sp.csr_matrix(
        (np.concatenate([v.values for v in vectors]),
         np.concatenate([v.indices for v in vectors]), indptr),
        shape=(len(vectors), dim),
    )
