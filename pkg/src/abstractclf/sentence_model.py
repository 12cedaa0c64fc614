"""Sentence-level classification aggregated to one decision per abstract."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .corpus import ClassLabel, Corpus, Document
from .softmax import PredictionDistribution, SoftmaxClassifier, softmax_rows
from .textprep import Sentence, split_sentences

AGGREGATIONS = ("log_sum", "prob_mean")


class EmptyAggregationError(ValueError):
    """No sentence survived filtering; the caller has to fall back."""


@dataclass(frozen=True)
class AggregationConfig:
    train_min_tokens: int = 10
    score_min_tokens: int = 6
    aggregation: str = "log_sum"
    fallback: str = "whole_abstract"

    def __post_init__(self):
        if self.train_min_tokens < 1 or self.score_min_tokens < 1:
            raise ValueError("token thresholds must be >= 1")
        if self.aggregation not in AGGREGATIONS:
            raise ValueError(f"aggregation must be one of {AGGREGATIONS}")
        if self.fallback != "whole_abstract":
            raise ValueError("the only supported fallback is 'whole_abstract'")


@dataclass(frozen=True)
class SentenceExample:
    parent_doc_id: str
    sentence: Sentence
    label: ClassLabel


@dataclass(frozen=True)
class Aggregate:
    scores: np.ndarray
    index: int

    @property
    def label(self) -> ClassLabel:
        return ClassLabel.from_index(self.index)


@dataclass(frozen=True)
class AbstractScore:
    distribution: PredictionDistribution
    index: int
    scores: np.ndarray
    n_sentences: int
    used_fallback: bool

    @property
    def label(self) -> ClassLabel:
        return ClassLabel.from_index(self.index)


def build_sentence_trainset(corpus: Corpus | Sequence[Document],
                            cfg: AggregationConfig = AggregationConfig()) -> list[SentenceExample]:
    out = []
    for doc in corpus:
        if doc.label is None:
            raise ValueError(f"document {doc.id!r} is unlabeled")
        for sent in split_sentences(doc.text, doc.id):
            if sent.token_count >= cfg.train_min_tokens:
                out.append(SentenceExample(doc.id, sent, doc.label))
    return out


def aggregate(dists: Sequence[PredictionDistribution | np.ndarray],
              method: str = "log_sum") -> Aggregate:
    """Sum of per-sentence log probabilities (or their mean, for ``prob_mean``).

    Scores are left in the log domain; the argmax breaks ties toward the
    lowest class index.
    """
    if len(dists) == 0:
        raise EmptyAggregationError("no sentences to aggregate")
    P = np.vstack([d.probs if isinstance(d, PredictionDistribution) else np.asarray(d)
                   for d in dists])
    if method == "log_sum":
        if (P <= 0).any():
            raise ValueError("log-sum aggregation needs strictly positive probabilities")
        scores = np.log(P).sum(axis=0)
    elif method == "prob_mean":
        scores = P.mean(axis=0)
    else:
        raise ValueError(f"unknown aggregation {method!r}")
    return Aggregate(scores, int(np.argmax(scores)))


def score_abstract(model: SoftmaxClassifier, text: str,
                   featurize: Callable[[list[str]], object],
                   cfg: AggregationConfig = AggregationConfig(),
                   doc_id: str = "") -> AbstractScore:
    """Score an abstract from its sentences with at least ``score_min_tokens`` tokens.

    ``featurize`` maps a list of texts to a feature matrix accepted by the
    model.  If no sentence is long enough the whole abstract is scored as a
    single sentence.
    """
    sentences = [s.text for s in split_sentences(text, doc_id)
                 if s.token_count >= cfg.score_min_tokens]
    used_fallback = not sentences
    if used_fallback:
        sentences = [" ".join(text.split())]
    probs = model.predict_proba_matrix(featurize(sentences))
    agg = aggregate(list(probs), cfg.aggregation)
    if cfg.aggregation == "log_sum":
        dist = softmax_rows(agg.scores[None, :])[0]
    else:
        dist = agg.scores / agg.scores.sum()
    return AbstractScore(PredictionDistribution(doc_id, dist), agg.index, agg.scores,
                         len(sentences), used_fallback)
