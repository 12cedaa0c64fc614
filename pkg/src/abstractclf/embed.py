"""Externally computed document embeddings and the embedding+topic feature set.

File format: a header line ``dim=<D>`` followed by one line per document,
``doc_id<TAB>v1,...,vD``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .lda import TopicProportions

_HEADER = re.compile(r"^dim=(\d+)$")


class EmbeddingError(ValueError):
    pass


@dataclass
class EmbeddingTable:
    dimension: int
    vectors: dict[str, np.ndarray] = field(default_factory=dict)

    def __len__(self):
        return len(self.vectors)

    def __contains__(self, doc_id):
        return doc_id in self.vectors

    def __getitem__(self, doc_id) -> np.ndarray:
        return self.vectors[doc_id]

    def matrix(self, doc_ids: Sequence[str]) -> np.ndarray:
        missing = [d for d in doc_ids if d not in self.vectors]
        if missing:
            shown = ", ".join(missing[:5])
            raise EmbeddingError(f"{len(missing)} documents have no embedding (e.g. {shown})")
        if not doc_ids:
            return np.zeros((0, self.dimension))
        return np.vstack([self.vectors[d] for d in doc_ids])


def load_embeddings(path) -> EmbeddingTable:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise EmbeddingError("line 1: missing 'dim=<D>' header")
    m = _HEADER.match(lines[0].strip())
    if not m:
        raise EmbeddingError(f"line 1: expected 'dim=<D>' header, got {lines[0][:40]!r}")
    dim = int(m.group(1))
    table = EmbeddingTable(dim)
    for lineno, line in enumerate(lines[1:], 2):
        if not line.strip():
            continue
        doc_id, sep, values = line.partition("\t")
        if not sep or not doc_id:
            raise EmbeddingError(f"line {lineno}: expected 'doc_id<TAB>values'")
        if doc_id in table.vectors:
            raise EmbeddingError(f"line {lineno}: duplicate doc_id {doc_id!r}")
        parts = values.split(",") if values.strip() else []
        if len(parts) != dim:
            raise EmbeddingError(
                f"line {lineno} ({doc_id}): expected {dim} values, got {len(parts)}"
            )
        try:
            vec = np.array([float(p) for p in parts], dtype=np.float64)
        except ValueError:
            raise EmbeddingError(f"line {lineno} ({doc_id}): unparsable value") from None
        if not np.isfinite(vec).all():
            raise EmbeddingError(f"line {lineno} ({doc_id}): non-finite value")
        table.vectors[doc_id] = vec
    return table


def save_embeddings(table: EmbeddingTable, path) -> None:
    out = [f"dim={table.dimension}"]
    for doc_id, vec in table.vectors.items():
        if len(vec) != table.dimension:
            raise EmbeddingError(f"vector for {doc_id!r} has wrong dimension")
        if not all(math.isfinite(v) for v in vec):
            raise EmbeddingError(f"vector for {doc_id!r} has non-finite values")
        out.append(doc_id + "\t" + ",".join(repr(float(v)) for v in vec))
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")


def concat_features(emb, theta: TopicProportions | np.ndarray) -> np.ndarray:
    """Embedding components first, then the topic proportions. No rescaling."""
    t = theta.theta if isinstance(theta, TopicProportions) else theta
    return np.concatenate([np.asarray(emb, dtype=np.float64).ravel(),
                           np.asarray(t, dtype=np.float64).ravel()])
