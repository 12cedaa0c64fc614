"""Labeled abstract corpora: the closed seven-class schema, loading and saving."""

from __future__ import annotations

import csv
import enum
import io
import json
import random
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

SPLITS = ("train", "validation", "test")
FORMATS = ("tsv", "csv", "jsonl")
TSV_HEADER = "id\tlabel\ttext"


class CorpusError(ValueError):
    pass


class ClassLabel(enum.Enum):
    CL = "Computation and Language"
    CR = "Cryptography and Security"
    DC = "Distributed and Cluster Computing"
    DS = "Data Structures and Algorithms"
    LO = "Logic in Computer Science"
    NI = "Networking and Internet Architecture"
    SE = "Software Engineering"

    @property
    def code(self) -> str:
        return self.name

    @property
    def display_name(self) -> str:
        return self.value

    @property
    def index(self) -> int:
        return _INDEX[self]

    @classmethod
    def from_index(cls, i: int) -> "ClassLabel":
        return LABELS[i]

    @classmethod
    def from_code(cls, code: str) -> "ClassLabel":
        try:
            return cls[code]
        except KeyError:
            raise CorpusError(f"unknown label code {code!r}") from None


LABELS: tuple[ClassLabel, ...] = tuple(ClassLabel)
_INDEX = {label: i for i, label in enumerate(LABELS)}
NUM_CLASSES = len(LABELS)


@dataclass(frozen=True)
class Document:
    id: str
    text: str
    label: ClassLabel | None = None

    def __post_init__(self):
        if not self.text.strip():
            raise CorpusError(f"document {self.id!r} has empty text")


@dataclass(frozen=True)
class Corpus:
    split_name: str
    documents: tuple[Document, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.split_name not in SPLITS:
            raise CorpusError(f"unknown split {self.split_name!r}")
        object.__setattr__(self, "documents", tuple(self.documents))
        seen = set()
        for doc in self.documents:
            if doc.id in seen:
                raise CorpusError(f"duplicate document id {doc.id!r}")
            seen.add(doc.id)
            if doc.label is None and self.split_name != "test":
                raise CorpusError(
                    f"document {doc.id!r} in {self.split_name} split has no label"
                )

    def __len__(self):
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    @property
    def ids(self) -> list[str]:
        return [d.id for d in self.documents]

    def labels(self) -> dict[str, ClassLabel]:
        return {d.id: d.label for d in self.documents if d.label is not None}


def _escape(text: str) -> str:
    return (
        text.replace("\\", "\\\\")
        .replace("\t", "\\t")
        .replace("\n", "\\n")
        .replace("\r", "\\r")
    )


_UNESCAPE = {"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}


def _unescape(text: str, lineno: int) -> str:
    out = []
    chars = iter(text)
    for ch in chars:
        if ch != "\\":
            out.append(ch)
            continue
        nxt = next(chars, None)
        if nxt not in _UNESCAPE:
            raise CorpusError(f"line {lineno}: bad escape sequence \\{nxt or ''}")
        out.append(_UNESCAPE[nxt])
    return "".join(out)


def _make_doc(lineno: int, doc_id, label, text) -> Document:
    if not isinstance(doc_id, str) or not doc_id:
        raise CorpusError(f"line {lineno}: missing document id")
    if not isinstance(text, str) or not text.strip():
        raise CorpusError(f"line {lineno}: empty text")
    if label in (None, ""):
        parsed = None
    elif not isinstance(label, str) or label not in ClassLabel.__members__:
        raise CorpusError(f"line {lineno}: unknown label code {label!r}")
    else:
        parsed = ClassLabel[label]
    return Document(doc_id, text, parsed)


def _read_tsv(lines: list[str]) -> Iterable[Document]:
    for lineno, line in enumerate(lines, 1):
        if lineno == 1 and line == TSV_HEADER:
            continue
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise CorpusError(
                f"line {lineno}: expected 3 tab-separated fields, got {len(parts)}"
            )
        doc_id, label, text = parts
        yield _make_doc(lineno, doc_id, label, _unescape(text, lineno))


def _read_csv(raw: str) -> Iterable[Document]:
    reader = csv.reader(io.StringIO(raw, newline=""))
    header = next(reader, None)
    if header is None:
        return
    if [h.strip().lower() for h in header] != ["id", "label", "text"]:
        raise CorpusError(f"line 1: expected header id,label,text, got {header}")
    for row in reader:
        lineno = reader.line_num
        if not row:
            continue
        if len(row) != 3:
            raise CorpusError(f"line {lineno}: expected 3 fields, got {len(row)}")
        yield _make_doc(lineno, *row)


def _read_jsonl(lines: list[str]) -> Iterable[Document]:
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"line {lineno}: invalid JSON ({exc.msg})") from None
        if not isinstance(rec, dict):
            raise CorpusError(f"line {lineno}: expected a JSON object")
        yield _make_doc(lineno, rec.get("id"), rec.get("label"), rec.get("text"))


def infer_format(path) -> str:
    suffix = Path(path).suffix.lower().lstrip(".")
    return {"tsv": "tsv", "txt": "tsv", "csv": "csv", "jsonl": "jsonl", "json": "jsonl"}.get(
        suffix, "tsv"
    )


def load_corpus(path, format: str | None = None, split_name: str = "train") -> Corpus:
    """Read a corpus file, preserving row order.

    Malformed rows raise CorpusError naming the line number.
    """
    fmt = format or infer_format(path)
    if fmt not in FORMATS:
        raise CorpusError(f"unsupported corpus format {fmt!r}")
    raw = Path(path).read_text(encoding="utf-8")
    if fmt == "csv":
        docs = list(_read_csv(raw))
    else:
        lines = raw.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        lines = [ln.rstrip("\r") for ln in lines]
        docs = list(_read_tsv(lines) if fmt == "tsv" else _read_jsonl(lines))
    if not docs:
        raise CorpusError("empty corpus")
    return Corpus(split_name, tuple(docs))


def save_corpus(corpus: Corpus, path, format: str | None = None) -> None:
    fmt = format or infer_format(path)
    buf = io.StringIO(newline="")
    if fmt == "tsv":
        buf.write(TSV_HEADER + "\n")
        for d in corpus:
            code = d.label.code if d.label else ""
            buf.write(f"{_escape(d.id)}\t{code}\t{_escape(d.text)}\n")
    elif fmt == "csv":
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["id", "label", "text"])
        for d in corpus:
            writer.writerow([d.id, d.label.code if d.label else "", d.text])
    elif fmt == "jsonl":
        for d in corpus:
            rec = {"id": d.id, "label": d.label.code if d.label else None, "text": d.text}
            buf.write(json.dumps(rec, ensure_ascii=False) + "\n")
    else:
        raise CorpusError(f"unsupported corpus format {fmt!r}")
    Path(path).write_text(buf.getvalue(), encoding="utf-8", newline="")


def class_counts(corpus: Corpus | Sequence[Document]) -> dict[ClassLabel, int]:
    counts = Counter()
    for doc in corpus:
        if doc.label is None:
            raise CorpusError(f"document {doc.id!r} is unlabeled")
        counts[doc.label] += 1
    return {label: counts.get(label, 0) for label in LABELS}


def random_split(corpus: Corpus, fraction: float, seed: int,
                 names=("train", "validation")) -> tuple[Corpus, Corpus]:
    """Seeded shuffle-and-cut split; used to carve held-out sets in tests."""
    if not 0 < fraction < 1:
        raise ValueError("fraction must be in (0, 1)")
    docs = list(corpus.documents)
    random.Random(seed).shuffle(docs)
    cut = round(len(docs) * fraction)
    return Corpus(names[0], tuple(docs[:cut])), Corpus(names[1], tuple(docs[cut:]))
