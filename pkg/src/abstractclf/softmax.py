"""Multinomial logistic regression trained by full-batch gradient descent."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.special import logsumexp

from .corpus import LABELS, ClassLabel
from .tfidf import SparseVector, stack

FORMAT_NAME = "abstractclf.softmax"
FORMAT_VERSION = 1

ARMIJO_C = 1e-4
MAX_HALVINGS = 60


class DimensionError(ValueError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    max_iterations: int = 100
    l2_lambda: float | None = None  # None -> 1 / n_samples
    tolerance: float = 1e-4
    learning_rate: float = 1.0
    dropout_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be >= 0")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not 0 <= self.dropout_rate < 1:
            raise ValueError("dropout_rate must be in [0, 1)")
        if self.l2_lambda is not None and self.l2_lambda < 0:
            raise ValueError("l2_lambda must be nonnegative")


@dataclass(frozen=True)
class PredictionDistribution:
    doc_id: str
    probs: np.ndarray


@dataclass
class SoftmaxClassifier:
    weights: np.ndarray  # (K, D)
    bias: np.ndarray  # (K,)
    class_codes: tuple[str, ...] = tuple(label.code for label in LABELS)
    config: TrainConfig | None = None
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise DimensionError("weights must be (K, D) and bias (K,)")
        if len(self.class_codes) != self.num_classes:
            raise DimensionError("class_codes length must equal number of classes")
        if not (np.isfinite(self.weights).all() and np.isfinite(self.bias).all()):
            raise ValueError("non-finite model parameters")

    @classmethod
    def zeros(cls, num_classes: int, dimension: int, class_codes=None, config=None):
        codes = class_codes or _default_codes(num_classes)
        return cls(np.zeros((num_classes, dimension)), np.zeros(num_classes), tuple(codes), config)

    @property
    def num_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def feature_dimension(self) -> int:
        return self.weights.shape[1]

    def logits(self, X) -> np.ndarray:
        X = as_matrix(X)
        if X.shape[1] != self.feature_dimension:
            raise DimensionError(
                f"feature dimension {X.shape[1]} does not match model dimension {self.feature_dimension}"
            )
        return np.asarray(X @ self.weights.T) + self.bias

    def predict_proba_matrix(self, X) -> np.ndarray:
        return softmax_rows(self.logits(X))

    def predict_index(self, X) -> np.ndarray:
        return np.argmax(self.logits(X), axis=1)

    def to_dict(self) -> dict:
        return {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "class_codes": list(self.class_codes),
            "feature_dimension": self.feature_dimension,
            "weights": self.weights.tolist(),
            "bias": self.bias.tolist(),
            "config": asdict(self.config) if self.config else None,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SoftmaxClassifier":
        if data.get("format") != FORMAT_NAME or data.get("version") != FORMAT_VERSION:
            raise ValueError("unrecognized softmax model format or version")
        k = len(data["class_codes"])
        weights = np.asarray(data["weights"], dtype=np.float64).reshape(k, data["feature_dimension"])
        config = TrainConfig(**data["config"]) if data.get("config") else None
        return cls(weights, np.asarray(data["bias"]), tuple(data["class_codes"]), config)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "SoftmaxClassifier":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _default_codes(k: int) -> list[str]:
    return [label.code for label in LABELS] if k == len(LABELS) else [str(i) for i in range(k)]


def as_matrix(features):
    """Coerce features to a 2-D ndarray or CSR matrix."""
    if sp.issparse(features):
        return features.tocsr()
    if isinstance(features, np.ndarray):
        if features.ndim == 1:
            return features.reshape(1, -1)
        return features
    if isinstance(features, SparseVector):
        return stack([features])
    features = list(features)
    if features and all(isinstance(f, SparseVector) for f in features):
        dims = {f.dimension for f in features}
        if len(dims) != 1:
            raise DimensionError(f"inconsistent feature dimensions {sorted(dims)}")
        return stack(features)
    try:
        return np.asarray(features, dtype=np.float64)
    except ValueError:
        raise DimensionError("inconsistent feature dimensions") from None


def softmax_rows(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def objective(model: SoftmaxClassifier, X, y, l2_lambda: float) -> float:
    """Mean cross-entropy plus (l2_lambda / 2) * ||W||^2; the bias is not penalized."""
    z = model.logits(X)
    y = np.asarray(y)
    ce = logsumexp(z, axis=1) - z[np.arange(len(y)), y]
    return float(ce.mean() + 0.5 * l2_lambda * np.sum(model.weights ** 2))


def gradient(model: SoftmaxClassifier, X, y, l2_lambda: float = 0.0):
    """Analytic gradient of ``objective`` as (weight_grad, bias_grad)."""
    X = as_matrix(X)
    y = np.asarray(y)
    if X.shape[0] == 0:
        raise ValueError("empty batch")
    if X.shape[0] != len(y):
        raise DimensionError("features and labels differ in length")
    resid = model.predict_proba_matrix(X)
    resid[np.arange(len(y)), y] -= 1.0
    resid /= len(y)
    g_w = np.asarray((X.T @ resid).T) + l2_lambda * model.weights
    g_b = resid.sum(axis=0)
    return g_w, g_b


def _dropout(X, rate: float, rng: np.random.Generator):
    keep = 1.0 - rate
    if sp.issparse(X):
        out = X.copy()
        out.data = out.data * (rng.random(out.data.shape[0]) >= rate) / keep
        out.eliminate_zeros()
        return out
    return X * (rng.random(X.shape) >= rate) / keep


def train(features, labels: Sequence[int], config: TrainConfig = TrainConfig(),
          num_classes: int = len(LABELS), class_codes=None) -> SoftmaxClassifier:
    """Full-batch gradient descent with backtracking (Armijo) step halving.

    Stops when the largest absolute gradient component drops below
    ``config.tolerance`` or after ``config.max_iterations`` steps.  With a
    nonzero dropout rate every iteration draws a fresh inverted-dropout mask
    over the input features.
    """
    X = as_matrix(features)
    y = np.asarray(labels, dtype=np.int64)
    if X.shape[0] == 0 or X.shape[0] != len(y):
        raise DimensionError("features and labels must be non-empty and equally long")
    if y.min() < 0 or y.max() >= num_classes:
        raise ValueError(f"labels must lie in [0, {num_classes})")
    if len(np.unique(y)) < 2:
        raise ValueError("training needs at least 2 distinct labels")

    lam = config.l2_lambda if config.l2_lambda is not None else 1.0 / len(y)
    rng = np.random.default_rng(config.seed)
    model = SoftmaxClassifier.zeros(num_classes, X.shape[1], class_codes, config)
    step = config.learning_rate
    losses = []
    stop_reason = "max_iterations"
    iterations = 0
    for it in range(config.max_iterations):
        Xb = _dropout(X, config.dropout_rate, rng) if config.dropout_rate > 0 else X
        loss = objective(model, Xb, y, lam)
        g_w, g_b = gradient(model, Xb, y, lam)
        gmax = max(np.abs(g_w).max(initial=0.0), np.abs(g_b).max())
        if not losses:
            losses.append(loss)
        if gmax < config.tolerance:
            stop_reason = "converged"
            break
        sq = float(np.sum(g_w ** 2) + np.sum(g_b ** 2))
        for _ in range(MAX_HALVINGS):
            cand = SoftmaxClassifier(model.weights - step * g_w, model.bias - step * g_b,
                                     model.class_codes, config)
            cand_loss = objective(cand, Xb, y, lam)
            if cand_loss <= loss - ARMIJO_C * step * sq:
                break
            step *= 0.5
        else:
            stop_reason = "line_search_failed"
            break
        model = cand
        losses.append(cand_loss)
        iterations = it + 1
        step *= 2.0

    model.info = {
        "iterations": iterations,
        "stop_reason": stop_reason,
        "loss_history": losses,
        "l2_lambda": lam,
        "seed": config.seed,
    }
    return model


def predict_proba(model: SoftmaxClassifier, x, doc_id: str = "") -> PredictionDistribution:
    """Class probabilities for a single feature vector (dense or sparse)."""
    X = as_matrix(x)
    if X.shape[0] != 1:
        raise DimensionError("predict_proba expects a single feature vector")
    return PredictionDistribution(doc_id, model.predict_proba_matrix(X)[0])


def argmax_index(probs) -> int:
    # np.argmax returns the first maximal index, i.e. ties go to the lowest class
    return int(np.argmax(np.asarray(probs)))


def argmax_class(dist: PredictionDistribution | np.ndarray) -> ClassLabel:
    probs = dist.probs if isinstance(dist, PredictionDistribution) else dist
    if len(probs) != len(LABELS):
        raise DimensionError("argmax_class needs a distribution over the 7 classes")
    return ClassLabel.from_index(argmax_index(probs))
