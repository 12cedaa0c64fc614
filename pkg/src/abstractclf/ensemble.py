"""Hard-label majority voting with reproducible random tie-breaking."""

from __future__ import annotations

import hashlib
import random
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .corpus import LABELS, ClassLabel


class CoverageError(ValueError):
    pass


@dataclass(frozen=True)
class VoteSet:
    doc_id: str
    votes: tuple[tuple[str, ClassLabel], ...]

    def __post_init__(self):
        object.__setattr__(self, "votes", tuple(self.votes))
        names = [name for name, _ in self.votes]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate model names in votes for {self.doc_id!r}")


@dataclass(frozen=True)
class EnsembleDecision:
    doc_id: str
    chosen: ClassLabel
    max_votes: int
    tied_classes: frozenset
    tie_broken: bool


def tie_break_seed(seed: int, doc_id: str) -> int:
    digest = hashlib.blake2b(f"{seed}\x1f{doc_id}".encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def majority_vote(votes: VoteSet, seed: int = 0, deterministic: bool = False) -> EnsembleDecision:
    """Pick the class with the most votes.

    Ties are broken uniformly at random with a generator seeded from
    ``(seed, doc_id)``, so the outcome does not depend on vote order or on
    which other documents are processed.  ``deterministic=True`` picks the
    lowest class index instead.
    """
    if not votes.votes:
        raise ValueError(f"no votes for document {votes.doc_id!r}")
    counts = Counter(label for _, label in votes.votes)
    top = max(counts.values())
    tied = sorted((c for c, n in counts.items() if n == top), key=lambda c: c.index)
    if len(tied) == 1:
        chosen = tied[0]
    elif deterministic:
        chosen = tied[0]
    else:
        chosen = random.Random(tie_break_seed(seed, votes.doc_id)).choice(tied)
    return EnsembleDecision(votes.doc_id, chosen, top, frozenset(tied), len(tied) > 1)


def ensemble_run(per_model: Mapping[str, Mapping[str, ClassLabel]], seed: int = 0,
                 deterministic: bool = False) -> dict[str, EnsembleDecision]:
    if not per_model:
        raise ValueError("no models to ensemble")
    id_sets = {name: set(preds) for name, preds in per_model.items()}
    union = set().union(*id_sets.values())
    missing = {name: sorted(union - ids) for name, ids in id_sets.items() if ids != union}
    if missing:
        detail = "; ".join(f"{name} missing {len(ids)} ids (e.g. {', '.join(ids[:3])})"
                           for name, ids in sorted(missing.items()))
        raise CoverageError(f"prediction coverage mismatch: {detail}")
    first = next(iter(per_model.values()))
    out = {}
    for doc_id in first:
        vs = VoteSet(doc_id, tuple((name, preds[doc_id]) for name, preds in per_model.items()))
        out[doc_id] = majority_vote(vs, seed, deterministic)
    return out


def tie_summary(decisions: Mapping[str, EnsembleDecision]) -> dict:
    ties = [d for d in decisions.values() if d.tie_broken]
    by_size = Counter(len(d.tied_classes) for d in ties)
    return {
        "documents": len(decisions),
        "ties": len(ties),
        "ties_by_width": {str(k): v for k, v in sorted(by_size.items())},
    }


PRED_HEADER = "doc_id\tlabel"
DECISION_HEADER = "doc_id\tlabel\tmax_votes\ttie"


def write_predictions(path, labels: Mapping[str, ClassLabel]) -> None:
    rows = [PRED_HEADER] + [f"{doc_id}\t{label.code}" for doc_id, label in labels.items()]
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def read_predictions(path) -> dict[str, ClassLabel]:
    """Read a doc_id/class-code TSV (header optional, extra columns ignored)."""
    out = {}
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    for lineno, line in enumerate(lines, 1):
        if not line.strip() or (lineno == 1 and line.startswith("doc_id\t")):
            continue
        parts = line.split("\t")
        if len(parts) < 2:
            raise ValueError(f"{path}: line {lineno}: expected doc_id<TAB>label")
        doc_id, code = parts[0], parts[1]
        if code not in ClassLabel.__members__:
            raise ValueError(f"{path}: line {lineno}: unknown label code {code!r}")
        if doc_id in out:
            raise ValueError(f"{path}: line {lineno}: duplicate doc_id {doc_id!r}")
        out[doc_id] = ClassLabel[code]
    return out


def write_probabilities(path, doc_ids: Sequence[str], probs) -> None:
    rows = ["doc_id\t" + "\t".join(label.code for label in LABELS)]
    for doc_id, p in zip(doc_ids, probs):
        rows.append(doc_id + "\t" + "\t".join(repr(float(v)) for v in p))
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def write_decisions(path, decisions: Mapping[str, EnsembleDecision]) -> None:
    rows = [DECISION_HEADER]
    for d in decisions.values():
        rows.append(f"{d.doc_id}\t{d.chosen.code}\t{d.max_votes}\t{int(d.tie_broken)}")
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")
