"""LDA topic model trained by collapsed Gibbs sampling."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammaln

from .textprep import TokenizedDoc

try:
    from numba import njit
except ImportError:  # pragma: no cover
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

FORMAT_NAME = "abstractclf.lda"
FORMAT_VERSION = 1


class LdaError(ValueError):
    pass


@dataclass(frozen=True)
class LdaConfig:
    num_topics: int = 50
    alpha: float | None = None  # None -> 50 / num_topics
    beta: float = 0.01
    train_iterations: int = 1000
    infer_iterations: int = 100
    burn_in: int = 200
    infer_burn_in: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.alpha is None:
            object.__setattr__(self, "alpha", 50.0 / self.num_topics if self.num_topics > 0 else 1.0)
        if self.num_topics < 1:
            raise LdaError("num_topics must be >= 1")
        if not (self.alpha > 0 and self.beta > 0):
            raise LdaError("alpha and beta must be positive")
        if self.train_iterations < 0 or not 0 <= self.burn_in < max(self.train_iterations, 1):
            raise LdaError("burn_in must be smaller than train_iterations")
        if self.infer_iterations < 1 or not 0 <= self.infer_burn_in < self.infer_iterations:
            raise LdaError("infer_burn_in must be smaller than infer_iterations")


@dataclass(frozen=True)
class TopicProportions:
    doc_id: str
    theta: np.ndarray


@dataclass
class GibbsState:
    """Mutable sampler state, handed to fit callbacks after every sweep."""
    words: np.ndarray
    doc_of: np.ndarray
    z: np.ndarray
    doc_topic: np.ndarray
    topic_term: np.ndarray
    topic_totals: np.ndarray


@dataclass(frozen=True)
class LdaModel:
    config: LdaConfig
    topic_term_counts: np.ndarray
    topic_totals: np.ndarray
    vocab: dict[str, int]
    log_likelihood: list = field(default_factory=list, compare=False)

    def __post_init__(self):
        if self.topic_term_counts.shape != (self.config.num_topics, len(self.vocab)):
            raise LdaError("count matrix shape does not match config and vocabulary")
        if (self.topic_term_counts < 0).any():
            raise LdaError("negative topic-term count")
        if not np.array_equal(self.topic_term_counts.sum(axis=1), self.topic_totals):
            raise LdaError("topic totals disagree with topic-term counts")

    @property
    def num_topics(self) -> int:
        return self.config.num_topics

    def infer(self, doc) -> TopicProportions:
        return lda_infer(self, doc)

    def top_terms(self, k: int, n: int = 10) -> list[str]:
        inv = {i: t for t, i in self.vocab.items()}
        order = np.argsort(-self.topic_term_counts[k], kind="stable")[:n]
        return [inv[i] for i in order]

    def to_dict(self) -> dict:
        return {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "config": asdict(self.config),
            "terms": sorted(self.vocab, key=self.vocab.__getitem__),
            "topic_term_counts": self.topic_term_counts.tolist(),
            "log_likelihood": [[int(s), float(v)] for s, v in self.log_likelihood],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LdaModel":
        if data.get("format") != FORMAT_NAME or data.get("version") != FORMAT_VERSION:
            raise LdaError("unrecognized LDA model format or version")
        counts = np.asarray(data["topic_term_counts"], dtype=np.int64)
        cfg = LdaConfig(**data["config"])
        if counts.size == 0:
            counts = counts.reshape(cfg.num_topics, 0)
        vocab = {t: i for i, t in enumerate(data["terms"])}
        return cls(cfg, counts, counts.sum(axis=1), vocab,
                   [tuple(x) for x in data.get("log_likelihood", [])])

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "LdaModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@njit(cache=True)
def _train_sweep(words, doc_of, z, ndk, nkw, nk, alpha, beta, vbeta, u):
    num_topics = nk.shape[0]
    cum = np.empty(num_topics)
    for i in range(words.shape[0]):
        w = words[i]
        d = doc_of[i]
        k = z[i]
        ndk[d, k] -= 1
        nkw[k, w] -= 1
        nk[k] -= 1
        total = 0.0
        for t in range(num_topics):
            total += (ndk[d, t] + alpha) * (nkw[t, w] + beta) / (nk[t] + vbeta)
            cum[t] = total
        r = u[i] * total
        k = 0
        while k < num_topics - 1 and cum[k] <= r:
            k += 1
        z[i] = k
        ndk[d, k] += 1
        nkw[k, w] += 1
        nk[k] += 1


@njit(cache=True)
def _infer_sweep(words, z, nd, nkw, nk, alpha, beta, vbeta, u):
    num_topics = nk.shape[0]
    cum = np.empty(num_topics)
    for i in range(words.shape[0]):
        w = words[i]
        nd[z[i]] -= 1
        total = 0.0
        for t in range(num_topics):
            total += (nd[t] + alpha) * (nkw[t, w] + beta) / (nk[t] + vbeta)
            cum[t] = total
        r = u[i] * total
        k = 0
        while k < num_topics - 1 and cum[k] <= r:
            k += 1
        z[i] = k
        nd[k] += 1


def _tokens(doc) -> Sequence[str]:
    return doc.tokens if isinstance(doc, TokenizedDoc) else doc


def _doc_id(doc) -> str:
    return doc.doc_id if isinstance(doc, TokenizedDoc) else ""


def log_likelihood(state: GibbsState, alpha: float, beta: float) -> float:
    """Joint log p(w, z) with both multinomials integrated out."""
    num_topics, vocab_size = state.topic_term.shape
    n_docs = state.doc_topic.shape[0]
    ll = num_topics * (gammaln(vocab_size * beta) - vocab_size * gammaln(beta))
    ll += gammaln(state.topic_term + beta).sum()
    ll -= gammaln(state.topic_totals + vocab_size * beta).sum()
    ll += n_docs * (gammaln(num_topics * alpha) - num_topics * gammaln(alpha))
    ll += gammaln(state.doc_topic + alpha).sum()
    ll -= gammaln(state.doc_topic.sum(axis=1) + num_topics * alpha).sum()
    return float(ll)


def check_counts(state: GibbsState) -> None:
    """Raise if the count tables disagree with the topic assignments."""
    num_topics, vocab_size = state.topic_term.shape
    n_docs = state.doc_topic.shape[0]
    nkw = np.zeros((num_topics, vocab_size), dtype=np.int64)
    np.add.at(nkw, (state.z, state.words), 1)
    ndk = np.zeros((n_docs, num_topics), dtype=np.int64)
    np.add.at(ndk, (state.doc_of, state.z), 1)
    if not (np.array_equal(nkw, state.topic_term) and np.array_equal(ndk, state.doc_topic)
            and np.array_equal(nkw.sum(axis=1), state.topic_totals)):
        raise LdaError("count tables out of sync with assignments")
    if state.topic_totals.sum() != len(state.words):
        raise LdaError("token count not conserved")


def lda_fit(docs: Sequence[TokenizedDoc], config: LdaConfig = LdaConfig(),
            callback: Callable[[int, GibbsState], None] | None = None,
            check_invariants: bool = False, loglik_every: int = 0) -> LdaModel:
    """Fit by collapsed Gibbs sampling over unigram tokens.

    Runs ``config.train_iterations`` full sweeps in corpus order and returns
    the final count state.  ``callback(sweep, state)`` is invoked after each
    sweep; with ``check_invariants`` the count tables are recounted from the
    assignments after every sweep.
    """
    if len(docs) == 0:
        raise LdaError("cannot fit LDA on an empty document collection")
    terms = sorted({t for doc in docs for t in _tokens(doc)})
    if not terms:
        raise LdaError("all documents are empty")
    vocab = {t: i for i, t in enumerate(terms)}
    words = np.array([vocab[t] for doc in docs for t in _tokens(doc)], dtype=np.int64)
    doc_of = np.repeat(np.arange(len(docs), dtype=np.int64),
                       [len(_tokens(doc)) for doc in docs])

    num_topics, vocab_size = config.num_topics, len(vocab)
    alpha, beta = float(config.alpha), float(config.beta)
    rng = np.random.default_rng(config.seed)
    z = rng.integers(num_topics, size=len(words)).astype(np.int64)
    ndk = np.zeros((len(docs), num_topics), dtype=np.int64)
    np.add.at(ndk, (doc_of, z), 1)
    nkw = np.zeros((num_topics, vocab_size), dtype=np.int64)
    np.add.at(nkw, (z, words), 1)
    nk = nkw.sum(axis=1)
    state = GibbsState(words, doc_of, z, ndk, nkw, nk)

    trace = []
    for sweep in range(config.train_iterations):
        u = rng.random(len(words))
        _train_sweep(words, doc_of, z, ndk, nkw, nk, alpha, beta, vocab_size * beta, u)
        if check_invariants:
            check_counts(state)
        if loglik_every and (sweep % loglik_every == 0 or sweep == config.train_iterations - 1):
            trace.append((sweep, log_likelihood(state, alpha, beta)))
        if callback is not None:
            callback(sweep, state)
    return LdaModel(config, nkw.copy(), nk.copy(), vocab, trace)


def doc_seed(seed: int, doc_id: str) -> int:
    digest = hashlib.blake2b(f"{seed}\x1f{doc_id}".encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def lda_infer(model: LdaModel, doc: TokenizedDoc | Sequence[str], doc_id: str | None = None) -> TopicProportions:
    """Topic proportions for one document with the topic-term counts held fixed.

    The sampler seed depends only on the model seed and the document id, so a
    document scores the same regardless of batch order.
    """
    cfg = model.config
    doc_id = _doc_id(doc) if doc_id is None else doc_id
    num_topics = cfg.num_topics
    alpha, beta = float(cfg.alpha), float(cfg.beta)
    words = np.array([model.vocab[t] for t in _tokens(doc) if t in model.vocab], dtype=np.int64)
    n_d = len(words)
    if n_d == 0:
        return TopicProportions(doc_id, np.full(num_topics, 1.0 / num_topics))

    rng = np.random.default_rng(doc_seed(cfg.seed, doc_id))
    z = rng.integers(num_topics, size=n_d).astype(np.int64)
    nd = np.bincount(z, minlength=num_topics).astype(np.int64)
    vbeta = len(model.vocab) * beta
    acc = np.zeros(num_topics)
    kept = 0
    for sweep in range(cfg.infer_iterations):
        u = rng.random(n_d)
        _infer_sweep(words, z, nd, model.topic_term_counts, model.topic_totals, alpha, beta, vbeta, u)
        if sweep >= cfg.infer_burn_in:
            acc += nd
            kept += 1
    theta = (acc / kept + alpha) / (n_d + num_topics * alpha)
    return TopicProportions(doc_id, theta)


def infer_many(model: LdaModel, docs: Sequence[TokenizedDoc]) -> np.ndarray:
    if not docs:
        return np.zeros((0, model.num_topics))
    return np.vstack([lda_infer(model, d).theta for d in docs])
