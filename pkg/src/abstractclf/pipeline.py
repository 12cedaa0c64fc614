"""Training and scoring of the four sub-models, plus artifact persistence."""

from __future__ import annotations

import json
import logging
import time
from dataclasses import asdict
from pathlib import Path
from typing import Sequence

import numpy as np

from . import lda as lda_mod
from . import tfidf as tfidf_mod
from .config import MODEL_IDS, RunConfig
from .corpus import Corpus, load_corpus
from .embed import EmbeddingTable, concat_features, load_embeddings
from .sentence_model import AggregationConfig, build_sentence_trainset, score_abstract
from .softmax import SoftmaxClassifier, train
from .textprep import DEFAULT_STOPWORDS, load_stopwords, preprocess

log = logging.getLogger(__name__)

ARTIFACT_FORMAT = "abstractclf.submodel"
ARTIFACT_VERSION = 1


class PipelineError(ValueError):
    pass


class EmbeddingsRequired(PipelineError):
    pass


class Preprocessor:
    def __init__(self, stopwords: frozenset = DEFAULT_STOPWORDS, stem: bool = True):
        self.stopwords = frozenset(stopwords)
        self.stem = stem

    def __call__(self, text: str, doc_id: str = ""):
        return preprocess(text, self.stopwords, self.stem, doc_id)

    def to_dict(self) -> dict:
        return {"stem": self.stem, "stopwords": sorted(self.stopwords)}

    @classmethod
    def from_dict(cls, data: dict) -> "Preprocessor":
        return cls(frozenset(data["stopwords"]), data["stem"])


class SubModel:
    """A trained sub-system: feature components plus its softmax head."""

    def __init__(self, model_id: str, head: SoftmaxClassifier, prep: Preprocessor,
                 tfidf=None, lda=None, aggregation: AggregationConfig | None = None):
        if model_id not in MODEL_IDS:
            raise PipelineError(f"unknown model id {model_id!r}")
        self.model_id = model_id
        self.head = head
        self.prep = prep
        self.tfidf = tfidf
        self.lda = lda
        self.aggregation = aggregation

    @property
    def needs_embeddings(self) -> bool:
        return self.model_id in ("m1_embed", "m2_embed_lda")

    def featurize_texts(self, texts: Sequence[str]):
        return self.tfidf.transform_many([self.prep(t) for t in texts])

    def features(self, corpus: Corpus, embeddings: EmbeddingTable | None = None):
        docs = list(corpus)
        if self.model_id == "m4_tfidf_lr":
            return self.featurize_texts([d.text for d in docs])
        if embeddings is None:
            raise EmbeddingsRequired("embedding table required")
        emb = embeddings.matrix([d.id for d in docs])
        if self.model_id == "m1_embed":
            return emb
        if self.model_id == "m2_embed_lda":
            return np.vstack([
                concat_features(e, lda_mod.lda_infer(self.lda, self.prep(d.text, d.id)))
                for e, d in zip(emb, docs)
            ]) if docs else np.zeros((0, self.head.feature_dimension))
        raise PipelineError("sentence model scores abstracts through predict_proba")

    def predict_proba(self, corpus: Corpus, embeddings: EmbeddingTable | None = None) -> np.ndarray:
        if self.model_id == "m3_sentence":
            rows = [score_abstract(self.head, d.text, self.featurize_texts,
                                   self.aggregation, d.id).distribution.probs
                    for d in corpus]
            return np.vstack(rows) if rows else np.zeros((0, self.head.num_classes))
        return self.head.predict_proba_matrix(self.features(corpus, embeddings))

    def to_dict(self) -> dict:
        comps = {"softmax": self.head.to_dict()}
        if self.tfidf is not None:
            comps["tfidf"] = self.tfidf.to_dict()
        if self.lda is not None:
            comps["lda"] = self.lda.to_dict()
        if self.aggregation is not None:
            comps["aggregation"] = asdict(self.aggregation)
        return {
            "format": ARTIFACT_FORMAT,
            "version": ARTIFACT_VERSION,
            "model_id": self.model_id,
            "textprep": self.prep.to_dict(),
            "components": comps,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SubModel":
        if data.get("format") != ARTIFACT_FORMAT or data.get("version") != ARTIFACT_VERSION:
            raise PipelineError("not a sub-model artifact (format/version mismatch)")
        comps = data["components"]
        return cls(
            data["model_id"],
            SoftmaxClassifier.from_dict(comps["softmax"]),
            Preprocessor.from_dict(data["textprep"]),
            tfidf_mod.TfidfModel.from_dict(comps["tfidf"]) if "tfidf" in comps else None,
            lda_mod.LdaModel.from_dict(comps["lda"]) if "lda" in comps else None,
            AggregationConfig(**comps["aggregation"]) if "aggregation" in comps else None,
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def save(self, path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "SubModel":
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"model artifact not found: {path}")
        return cls.from_dict(json.loads(path.read_text(encoding="utf-8")))


def _label_indices(docs) -> np.ndarray:
    return np.array([d.label.index for d in docs], dtype=np.int64)


def train_submodel(model_id: str, corpus: Corpus, cfg: RunConfig,
                   embeddings: EmbeddingTable | None = None) -> tuple[SubModel, dict]:
    """Train one sub-system end to end. Returns the model and a training log."""
    if model_id not in MODEL_IDS:
        raise PipelineError(f"unknown model id {model_id!r}; choose from {', '.join(MODEL_IDS)}")
    if model_id in ("m1_embed", "m2_embed_lda") and embeddings is None:
        raise EmbeddingsRequired("embedding table required")
    stopwords = load_stopwords(cfg.textprep.stopwords) if cfg.textprep.stopwords else DEFAULT_STOPWORDS
    prep = Preprocessor(stopwords, cfg.textprep.stem)
    tcfg = cfg.train_config(model_id)
    started = time.perf_counter()
    trace = {"model_id": model_id, "seeds": {"run": cfg.seed, "softmax": tcfg.seed}}
    docs = list(corpus)

    if model_id == "m3_sentence":
        examples = build_sentence_trainset(docs, cfg.sentence)
        if not examples:
            raise PipelineError("empty sentence training set")
        tok = [prep(ex.sentence.text, f"{ex.parent_doc_id}#{ex.sentence.index}") for ex in examples]
        tfidf = tfidf_mod.fit(tok, cfg.tfidf.ngram_range, cfg.tfidf.min_df_fraction)
        X = tfidf.transform_many(tok)
        y = np.array([ex.label.index for ex in examples])
        head = train(X, y, tcfg)
        model = SubModel(model_id, head, prep, tfidf=tfidf, aggregation=cfg.sentence)
        trace.update(n_sentences=len(examples), vocabulary_size=tfidf.dimension)
    elif model_id == "m4_tfidf_lr":
        tok = [prep(d.text, d.id) for d in docs]
        tfidf = tfidf_mod.fit(tok, cfg.tfidf.ngram_range, cfg.tfidf.min_df_fraction)
        head = train(tfidf.transform_many(tok), _label_indices(docs), tcfg)
        model = SubModel(model_id, head, prep, tfidf=tfidf)
        trace.update(vocabulary_size=tfidf.dimension)
    elif model_id == "m1_embed":
        head = train(embeddings.matrix([d.id for d in docs]), _label_indices(docs), tcfg)
        model = SubModel(model_id, head, prep)
    else:
        tok = [prep(d.text, d.id) for d in docs]
        topic_model = lda_mod.lda_fit(tok, cfg.lda, loglik_every=max(cfg.lda.train_iterations // 20, 1))
        theta = np.vstack([lda_mod.lda_infer(topic_model, t).theta for t in tok])
        X = np.hstack([embeddings.matrix([d.id for d in docs]), theta])
        head = train(X, _label_indices(docs), tcfg)
        model = SubModel(model_id, head, prep, lda=topic_model)
        trace["seeds"]["lda"] = cfg.lda.seed
        trace["lda_log_likelihood"] = topic_model.log_likelihood

    trace.update(
        n_documents=len(docs),
        feature_dimension=model.head.feature_dimension,
        stop_reason=model.head.info["stop_reason"],
        iterations=model.head.info["iterations"],
        l2_lambda=model.head.info["l2_lambda"],
        loss_history=model.head.info["loss_history"],
        train_config=asdict(tcfg),
        seconds=round(time.perf_counter() - started, 3),
    )
    log.info("trained %s: %s after %d iterations", model_id, trace["stop_reason"], trace["iterations"])
    return model, trace


def load_split(cfg: RunConfig, split: str) -> Corpus:
    if split not in cfg.corpus:
        raise PipelineError(f"config names no corpus file for split {split!r}")
    return load_corpus(cfg.corpus[split], cfg.corpus_format, split_name=split)


def load_run_embeddings(cfg: RunConfig, override=None) -> EmbeddingTable | None:
    path = override or cfg.embeddings
    return load_embeddings(path) if path else None


def model_path(cfg: RunConfig, model_id: str) -> Path:
    return Path(cfg.output_dir) / "models" / f"{model_id}.json"


def prediction_paths(cfg: RunConfig, model_id: str, split: str) -> tuple[Path, Path]:
    base = Path(cfg.output_dir) / "predictions"
    return base / f"{model_id}.{split}.tsv", base / f"{model_id}.{split}.probs.tsv"
