"""Linear (logistic) and two-hidden-layer ReLU MLP classifiers.

Both model families expose soft scores, hard labels, and gradients of the
soft score with respect to the input. Prediction entry points accept a
single vector of shape (d,) or a batch of shape (n, d); shapes of the
returned scores/gradients follow the input.

Binary models produce a scalar score, and the hard label is 1 when the
score is >= 0. Multi-class models produce one score per class; the hard
label is the argmax, with ties broken toward the lowest class index.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .errors import NumericalError

HIDDEN_WIDTH = 10

LOGISTIC_DEFAULTS = {"lr": 0.01, "epochs": 300, "batch_size": 32}
MLP_DEFAULTS = {"lr": 0.001, "epochs": 300, "batch_size": 32}


@dataclass(frozen=True)
class TrainConfig:
    lr: float
    epochs: int
    batch_size: int
    seed: int = 0

    @classmethod
    def logistic(cls, seed: int = 0, **overrides) -> "TrainConfig":
        return cls(seed=seed, **{**LOGISTIC_DEFAULTS, **overrides})

    @classmethod
    def mlp(cls, seed: int = 0, **overrides) -> "TrainConfig":
        return cls(seed=seed, **{**MLP_DEFAULTS, **overrides})


@dataclass(frozen=True, eq=False)
class LinearModel:
    """theta is (d,) with scalar bias for binary, (L, d) with (L,) bias otherwise."""

    theta: np.ndarray
    bias: np.ndarray | float
    num_classes: int
    train_config: TrainConfig | None = field(default=None, compare=False)

    def __post_init__(self):
        if not np.all(np.isfinite(self.theta)):
            raise NumericalError("linear model weights are not finite")
        if self.num_classes == 2 and self.theta.ndim != 1:
            raise ValueError("binary linear model needs a weight vector")
        if self.num_classes > 2 and self.theta.shape[0] != self.num_classes:
            raise ValueError("multi-class linear model needs one weight row per class")

    @property
    def num_features(self) -> int:
        return self.theta.shape[-1]

    @property
    def is_binary(self) -> bool:
        return self.num_classes == 2


@dataclass(frozen=True, eq=False)
class MlpModel:
    """Two ReLU hidden layers; output width 1 (binary) or num_classes."""

    weights: tuple[np.ndarray, np.ndarray, np.ndarray]
    biases: tuple[np.ndarray, np.ndarray, np.ndarray]
    num_classes: int
    train_config: TrainConfig | None = field(default=None, compare=False)

    def __post_init__(self):
        w1, w2, w3 = self.weights
        if w1.shape[1] != w2.shape[0] or w2.shape[1] != w3.shape[0]:
            raise ValueError("layer shapes do not chain")
        out = w3.shape[1]
        expected = 1 if self.num_classes == 2 else self.num_classes
        if out != expected:
            raise ValueError(f"output width {out} does not match {self.num_classes} classes")

    @property
    def num_features(self) -> int:
        return self.weights[0].shape[0]

    @property
    def is_binary(self) -> bool:
        return self.num_classes == 2


Model = LinearModel | MlpModel


def _check_input(model: Model, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != model.num_features:
        raise ValueError(f"input has {x.shape[-1]} features, model expects {model.num_features}")
    return x


def soft_predict(model: Model, x) -> np.ndarray | float:
    """Deterministic forward pass: scalar score (binary) or per-class scores."""
    x = _check_input(model, x)
    single = x.ndim == 1
    if isinstance(model, LinearModel):
        if model.is_binary:
            out = x @ model.theta + model.bias
        else:
            out = x @ model.theta.T + model.bias
    else:
        h = x
        for w, b in zip(model.weights[:-1], model.biases[:-1]):
            h = np.maximum(h @ w + b, 0.0)
        out = h @ model.weights[-1] + model.biases[-1]
        out = out[..., 0] if model.is_binary else out
    if single and np.ndim(out) == 0:
        return float(out)
    return out


def hard_predict(model: Model, x) -> int | np.ndarray:
    """Thresholded (binary, score >= 0 means class 1) or argmax class label."""
    score = soft_predict(model, x)
    if model.is_binary:
        result = np.asarray(score) >= 0.0
        return int(result) if np.ndim(score) == 0 else result.astype(int)
    labels = np.argmax(score, axis=-1)
    return int(labels) if np.asarray(score).ndim == 1 else labels


def input_gradient(model: Model, x, class_idx: int | None = None) -> np.ndarray:
    """Gradient of the soft score with respect to the input.

    For multi-class models, class_idx selects which score component is
    differentiated. ReLU units sitting exactly at zero pre-activation
    contribute zero (the flat side of the subgradient).
    """
    x = _check_input(model, x)
    if not model.is_binary and class_idx is None:
        raise ValueError("class_idx is required for multi-class models")
    if isinstance(model, LinearModel):
        theta = model.theta if model.is_binary else model.theta[class_idx]
        return np.broadcast_to(theta, x.shape).copy()

    single = x.ndim == 1
    h = x[None, :] if single else x
    activations = []
    for w, b in zip(model.weights[:-1], model.biases[:-1]):
        h = np.maximum(h @ w + b, 0.0)
        activations.append(h)
    out_col = 0 if model.is_binary else class_idx
    grad = np.broadcast_to(model.weights[-1][:, out_col], activations[-1].shape).copy()
    for w, act in zip(reversed(model.weights[:-1]), reversed(activations)):
        grad = (grad * (act > 0.0)) @ w.T
    return grad[0] if single else grad


def _check_trainable(train: Dataset):
    if train.num_rows == 0:
        raise ValueError("cannot train on an empty dataset")
    if not train.is_normalized():
        raise ValueError("training data must be normalized into [-1, 1] first")


def _softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _epoch_loss_binary(x, y, theta, bias) -> float:
    z = x @ theta + bias
    # log(1 + exp(-z*y')) with y' in {-1, +1}, stable form
    signed = np.where(y == 1, z, -z)
    return float(np.mean(np.logaddexp(0.0, -signed)))


def _epoch_loss_multi(x, y, theta, bias) -> float:
    scores = x @ theta.T + bias
    shifted = scores - scores.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    return float(-np.mean(log_probs[np.arange(len(y)), y]))


def train_logistic(train: Dataset, config: TrainConfig | None = None) -> LinearModel:
    """Fit (multinomial) logistic regression by mini-batch SGD on cross-entropy."""
    _check_trainable(train)
    config = config or TrainConfig.logistic()
    x, y = train.features, train.labels
    n, d = x.shape
    rng = np.random.default_rng(config.seed)
    binary = train.num_classes == 2
    if binary:
        theta, bias = np.zeros(d), 0.0
    else:
        theta, bias = np.zeros((train.num_classes, d)), np.zeros(train.num_classes)

    for epoch in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            xb, yb = x[idx], y[idx]
            if binary:
                err = _sigmoid(xb @ theta + bias) - yb
                theta -= config.lr * (xb.T @ err) / len(idx)
                bias -= config.lr * float(err.mean())
            else:
                probs = _softmax(xb @ theta.T + bias)
                probs[np.arange(len(idx)), yb] -= 1.0
                theta -= config.lr * (probs.T @ xb) / len(idx)
                bias -= config.lr * probs.mean(axis=0)
        loss = _epoch_loss_binary(x, y, theta, bias) if binary else _epoch_loss_multi(x, y, theta, bias)
        if not np.isfinite(loss):
            raise NumericalError(f"logistic training diverged at epoch {epoch}")
    return LinearModel(theta, bias, train.num_classes, config)


def init_mlp(num_features: int, num_classes: int, seed: int, hidden: int = HIDDEN_WIDTH) -> MlpModel:
    """He-style seeded uniform initialization, zero biases."""
    rng = np.random.default_rng(seed)
    out = 1 if num_classes == 2 else num_classes
    shapes = [(num_features, hidden), (hidden, hidden), (hidden, out)]
    weights = []
    for fan_in, fan_out in shapes:
        limit = np.sqrt(6.0 / fan_in)
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
    biases = tuple(np.zeros(s[1]) for s in shapes)
    return MlpModel(tuple(weights), biases, num_classes)


def train_mlp(train: Dataset, config: TrainConfig | None = None) -> MlpModel:
    """Fit the two-hidden-layer ReLU network by mini-batch SGD on cross-entropy."""
    _check_trainable(train)
    config = config or TrainConfig.mlp()
    x, y = train.features, train.labels
    n = x.shape[0]
    rng = np.random.default_rng(config.seed)
    model = init_mlp(train.num_features, train.num_classes, config.seed)
    w = [m.copy() for m in model.weights]
    b = [m.copy() for m in model.biases]
    binary = train.num_classes == 2

    for epoch in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            xb, yb = x[idx], y[idx]
            h1 = np.maximum(xb @ w[0] + b[0], 0.0)
            h2 = np.maximum(h1 @ w[1] + b[1], 0.0)
            out = h2 @ w[2] + b[2]
            if binary:
                delta = (_sigmoid(out[:, 0]) - yb)[:, None]
            else:
                delta = _softmax(out)
                delta[np.arange(len(idx)), yb] -= 1.0
            delta /= len(idx)
            grad_w2, grad_b2 = h2.T @ delta, delta.sum(axis=0)
            d1 = (delta @ w[2].T) * (h2 > 0.0)
            grad_w1, grad_b1 = h1.T @ d1, d1.sum(axis=0)
            d0 = (d1 @ w[1].T) * (h1 > 0.0)
            grad_w0, grad_b0 = xb.T @ d0, d0.sum(axis=0)
            for wm, gm in zip(w, (grad_w0, grad_w1, grad_w2)):
                wm -= config.lr * gm
            for bm, gm in zip(b, (grad_b0, grad_b1, grad_b2)):
                bm -= config.lr * gm
        probe = MlpModel(tuple(w), tuple(b), train.num_classes)
        if binary:
            loss = float(np.mean(np.logaddexp(0.0, -np.where(y == 1, 1.0, -1.0) * soft_predict(probe, x))))
        else:
            loss = _epoch_loss_multi_scores(soft_predict(probe, x), y)
        if not np.isfinite(loss):
            raise NumericalError(f"mlp training diverged at epoch {epoch}")
    return MlpModel(tuple(w), tuple(b), train.num_classes, config)


def _epoch_loss_multi_scores(scores: np.ndarray, y: np.ndarray) -> float:
    shifted = scores - scores.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    return float(-np.mean(log_probs[np.arange(len(y)), y]))


def model_to_json(model: Model) -> str:
    """Serialize a model: family tag, shapes, row-major weights, config echo."""
    cfg = None
    if model.train_config is not None:
        cfg = {
            "lr": model.train_config.lr,
            "epochs": model.train_config.epochs,
            "batch_size": model.train_config.batch_size,
            "seed": model.train_config.seed,
        }
    if isinstance(model, LinearModel):
        doc = {
            "family": "linear",
            "num_classes": model.num_classes,
            "shape": list(model.theta.shape),
            "theta": model.theta.ravel().tolist(),
            "bias": model.bias if np.isscalar(model.bias) else np.asarray(model.bias).tolist(),
            "train_config": cfg,
        }
    else:
        doc = {
            "family": "mlp",
            "num_classes": model.num_classes,
            "shapes": [list(w.shape) for w in model.weights],
            "weights": [w.ravel().tolist() for w in model.weights],
            "biases": [np.asarray(b).tolist() for b in model.biases],
            "train_config": cfg,
        }
    return json.dumps(doc, indent=2)


def model_from_json(text: str) -> Model:
    doc = json.loads(text)
    cfg = doc.get("train_config")
    config = TrainConfig(**cfg) if cfg else None
    if doc["family"] == "linear":
        theta = np.asarray(doc["theta"], dtype=float).reshape(doc["shape"])
        bias = doc["bias"]
        bias = float(bias) if np.isscalar(bias) else np.asarray(bias, dtype=float)
        return LinearModel(theta, bias, doc["num_classes"], config)
    if doc["family"] == "mlp":
        weights = tuple(
            np.asarray(w, dtype=float).reshape(s) for w, s in zip(doc["weights"], doc["shapes"])
        )
        biases = tuple(np.asarray(b, dtype=float) for b in doc["biases"])
        return MlpModel(weights, biases, doc["num_classes"], config)
    raise ValueError(f"unknown model family {doc.get('family')!r}")
