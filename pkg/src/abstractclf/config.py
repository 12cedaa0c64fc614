"""Run configuration: one TOML file holding every pipeline parameter."""

from __future__ import annotations

import hashlib
import os
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .lda import LdaConfig, LdaError
from .sentence_model import AggregationConfig
from .softmax import TrainConfig

MODEL_IDS = ("m1_embed", "m2_embed_lda", "m3_sentence", "m4_tfidf_lr")

# m2's head gets the 0.3 dropout; everything else trains without it
DEFAULT_DROPOUT = {"m2_embed_lda": 0.3}


class ConfigError(ValueError):
    pass


def derive_seed(seed: int, component: str) -> int:
    digest = hashlib.blake2b(f"{seed}\x1f{component}".encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little") & (2 ** 63 - 1)


@dataclass(frozen=True)
class TextprepConfig:
    stem: bool = True
    stopwords: str | None = None  # path; None -> bundled list


@dataclass(frozen=True)
class TfidfConfig:
    ngram_min: int = 1
    ngram_max: int = 4
    min_df_fraction: float = 0.0005

    def __post_init__(self):
        if not 1 <= self.ngram_min <= self.ngram_max:
            raise ConfigError("tfidf: need 1 <= ngram_min <= ngram_max")
        if not 0 < self.min_df_fraction <= 1:
            raise ConfigError("tfidf: min_df_fraction must be in (0, 1]")

    @property
    def ngram_range(self) -> tuple[int, int]:
        return (self.ngram_min, self.ngram_max)


@dataclass(frozen=True)
class RunConfig:
    corpus: dict
    output_dir: Path
    seed: int = 0
    corpus_format: str | None = None
    textprep: TextprepConfig = TextprepConfig()
    tfidf: TfidfConfig = TfidfConfig()
    lda: LdaConfig = LdaConfig()
    sentence: AggregationConfig = AggregationConfig()
    train: dict = field(default_factory=dict)
    embeddings: Path | None = None
    ensemble_deterministic_ties: bool = False

    def train_config(self, model_id: str) -> TrainConfig:
        return self.train[model_id]

    def seeds(self) -> dict:
        out = {"run": self.seed, "lda": self.lda.seed, "ensemble": self.ensemble_seed}
        out.update({f"softmax:{m}": cfg.seed for m, cfg in self.train.items()})
        return out

    @property
    def ensemble_seed(self) -> int:
        return derive_seed(self.seed, "ensemble")


_TOP_KEYS = {"seed", "output_dir", "corpus", "textprep", "tfidf", "lda", "sentence",
             "train", "embeddings", "ensemble"}


def _section(raw: dict, name: str, cls, exclude=()) -> dict:
    data = raw.get(name, {})
    if not isinstance(data, dict):
        raise ConfigError(f"[{name}] must be a table")
    allowed = {f.name for f in fields(cls)} - set(exclude)
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"[{name}] unknown keys: {', '.join(sorted(unknown))}")
    for f in fields(cls):
        if f.name in data and not _type_ok(data[f.name], f.type):
            raise ConfigError(f"[{name}] {f.name}: unexpected value {data[f.name]!r}")
    return dict(data)


def _type_ok(value, annotation) -> bool:
    ann = str(annotation)
    if "bool" in ann:
        return isinstance(value, bool) or (value is None and "None" in ann)
    if "int" in ann and "float" not in ann:
        return isinstance(value, int) and not isinstance(value, bool)
    if "float" in ann:
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if "str" in ann:
        return isinstance(value, str)
    return True


def _resolve(base: Path, p: str) -> Path:
    path = Path(p)
    return path if path.is_absolute() else Path(os.path.normpath(base / path))


def parse_config(raw: dict, base_dir: Path = Path("."), check_paths: bool = True) -> RunConfig:
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown top-level keys: {', '.join(sorted(unknown))}")
    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError("seed must be a nonnegative integer")

    corpus_raw = raw.get("corpus")
    if not isinstance(corpus_raw, dict) or "train" not in corpus_raw:
        raise ConfigError("[corpus] must name at least a train file")
    extra = set(corpus_raw) - {"train", "validation", "test", "format"}
    if extra:
        raise ConfigError(f"[corpus] unknown keys: {', '.join(sorted(extra))}")
    corpus = {k: _resolve(base_dir, v) for k, v in corpus_raw.items() if k != "format"}
    fmt = corpus_raw.get("format")
    if fmt not in (None, "tsv", "csv", "jsonl"):
        raise ConfigError(f"[corpus] format must be tsv, csv or jsonl, got {fmt!r}")

    tp = _section(raw, "textprep", TextprepConfig)
    if tp.get("stopwords"):
        tp["stopwords"] = str(_resolve(base_dir, tp["stopwords"]))
    textprep = TextprepConfig(**tp)
    tfidf = TfidfConfig(**_section(raw, "tfidf", TfidfConfig))

    lda_raw = _section(raw, "lda", LdaConfig, exclude=("seed",))
    try:
        lda = LdaConfig(seed=derive_seed(seed, "lda"), **lda_raw)
    except LdaError as exc:
        raise ConfigError(f"[lda] {exc}") from None
    try:
        sentence = AggregationConfig(**_section(raw, "sentence", AggregationConfig))
    except ValueError as exc:
        raise ConfigError(f"[sentence] {exc}") from None

    train_raw = raw.get("train", {})
    unknown = set(train_raw) - set(MODEL_IDS)
    if unknown:
        raise ConfigError(f"[train] unknown model ids: {', '.join(sorted(unknown))}")
    train = {}
    for model_id in MODEL_IDS:
        sect = _section(train_raw, model_id, TrainConfig, exclude=("seed",))
        sect.setdefault("dropout_rate", DEFAULT_DROPOUT.get(model_id, 0.0))
        try:
            train[model_id] = TrainConfig(seed=derive_seed(seed, f"softmax:{model_id}"), **sect)
        except ValueError as exc:
            raise ConfigError(f"[train.{model_id}] {exc}") from None

    emb = raw.get("embeddings", {})
    if not isinstance(emb, dict) or set(emb) - {"path"}:
        raise ConfigError("[embeddings] accepts only 'path'")
    embeddings = _resolve(base_dir, emb["path"]) if emb.get("path") else None

    ens = raw.get("ensemble", {})
    if set(ens) - {"deterministic_ties"}:
        raise ConfigError("[ensemble] accepts only 'deterministic_ties'")

    out = raw.get("output_dir", "runs")
    cfg = RunConfig(
        corpus=corpus, output_dir=_resolve(base_dir, out), seed=seed, corpus_format=fmt,
        textprep=textprep, tfidf=tfidf, lda=lda, sentence=sentence, train=train,
        embeddings=embeddings,
        ensemble_deterministic_ties=bool(ens.get("deterministic_ties", False)),
    )
    if check_paths:
        validate_paths(cfg)
    return cfg


def validate_paths(cfg: RunConfig) -> None:
    paths = list(cfg.corpus.values())
    if cfg.embeddings is not None:
        paths.append(cfg.embeddings)
    if cfg.textprep.stopwords:
        paths.append(Path(cfg.textprep.stopwords))
    missing = [str(p) for p in paths if not Path(p).is_file()]
    if missing:
        raise ConfigError(f"missing input files: {', '.join(missing)}")


def load_config(path, check_paths: bool = True) -> RunConfig:
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return parse_config(raw, path.parent, check_paths)


def with_overrides(cfg: RunConfig, **kwargs) -> RunConfig:
    kwargs = {k: v for k, v in kwargs.items() if v is not None}
    return replace(cfg, **kwargs) if kwargs else cfg
