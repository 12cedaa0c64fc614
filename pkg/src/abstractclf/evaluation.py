"""Per-class precision/recall/F1, weighted F1 and confusion matrices."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .corpus import LABELS, ClassLabel


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class ClassScores:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class EvalReport:
    per_class: dict
    weighted_f1: float
    macro_f1: float
    accuracy: float
    confusion: np.ndarray  # rows gold, columns predicted
    classes: tuple

    def to_dict(self) -> dict:
        return {
            "per_class": {
                _code(c): {"precision": s.precision, "recall": s.recall, "f1": s.f1,
                           "support": s.support}
                for c, s in self.per_class.items()
            },
            "weighted_f1": self.weighted_f1,
            "macro_f1": self.macro_f1,
            "accuracy": self.accuracy,
            "confusion": self.confusion.tolist(),
            "classes": [_code(c) for c in self.classes],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def format_table(self) -> str:
        codes = [_code(c) for c in self.classes]
        lines = [f"{'class':<8}{'precision':>10}{'recall':>10}{'f1':>10}{'support':>9}"]
        for c, s in self.per_class.items():
            lines.append(f"{_code(c):<8}{s.precision:>10.4f}{s.recall:>10.4f}{s.f1:>10.4f}{s.support:>9d}")
        total = int(self.confusion.sum())
        lines.append("")
        lines.append(f"{'accuracy':<28}{self.accuracy:>10.4f}{total:>9d}")
        lines.append(f"{'macro f1':<28}{self.macro_f1:>10.4f}{total:>9d}")
        lines.append(f"{'weighted f1':<28}{self.weighted_f1:>10.4f}{total:>9d}")
        lines.append("")
        lines.append("confusion (rows = gold, columns = predicted)")
        lines.append(" " * 6 + "".join(f"{c:>6}" for c in codes))
        for code, row in zip(codes, self.confusion):
            lines.append(f"{code:<6}" + "".join(f"{int(v):>6d}" for v in row))
        return "\n".join(lines)

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")


def _code(c) -> str:
    return c.code if isinstance(c, ClassLabel) else str(c)


def confusion_matrix(gold: Sequence, pred: Sequence, classes: Sequence) -> np.ndarray:
    index = {c: i for i, c in enumerate(classes)}
    cm = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for g, p in zip(gold, pred):
        cm[index[g], index[p]] += 1
    return cm


def _safe_div(num: float, den: float) -> float:
    return num / den if den else 0.0


def evaluate(gold: Mapping[str, object], pred: Mapping[str, object],
             classes: Sequence = LABELS) -> EvalReport:
    """Undefined precision, recall or F1 (zero denominator) count as 0."""
    if set(gold) != set(pred):
        only_gold = sorted(set(gold) - set(pred))
        only_pred = sorted(set(pred) - set(gold))
        raise EvaluationError(
            f"document id mismatch: {len(only_gold)} only in gold {only_gold[:5]}, "
            f"{len(only_pred)} only in predictions {only_pred[:5]}"
        )
    if not gold:
        raise EvaluationError("nothing to evaluate")
    ids = sorted(gold)
    cm = confusion_matrix([gold[i] for i in ids], [pred[i] for i in ids], classes)
    tp = np.diag(cm)
    per_class = {}
    f1s, supports = [], []
    for k, c in enumerate(classes):
        support = int(cm[k].sum())
        precision = _safe_div(tp[k], cm[:, k].sum())
        recall = _safe_div(tp[k], support)
        f1 = _safe_div(2 * precision * recall, precision + recall)
        per_class[c] = ClassScores(float(precision), float(recall), float(f1), support)
        f1s.append(f1)
        supports.append(support)
    total = sum(supports)
    weighted = sum(s * f for s, f in zip(supports, f1s)) / total
    present = [f for f, s, k in zip(f1s, supports, range(len(classes)))
               if s or cm[:, k].sum()]
    macro = sum(present) / len(present)
    return EvalReport(per_class, float(weighted), float(macro), float(tp.sum() / total),
                      cm, tuple(classes))
