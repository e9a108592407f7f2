"""Probability laws of model predictions under unrevealed features.

With the features jointly Gaussian, a binary linear score is exactly
Gaussian given the revealed values, and thresholding it at zero yields a
Bernoulli with success probability Phi(mean / std). A nonlinear score is
approximated by linearizing the network at the posterior mean, which gives
a Gaussian with variance g' cov g for the input gradient g. Multi-class
hard labels have no closed form and are estimated by Monte Carlo.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import NumericalError
from .gaussian import ConditionalGaussian, FactorCache, GaussianStats, condition, sample
from .models import LinearModel, MlpModel, Model, hard_predict, input_gradient, soft_predict

PROB_FLOOR = 1e-12


@dataclass(frozen=True)
class PredictiveGaussian:
    """Law of the (binary) soft score: N(mean, var)."""

    mean: float
    var: float

    def __post_init__(self):
        if not (np.isfinite(self.mean) and np.isfinite(self.var)):
            raise NumericalError("predictive gaussian has non-finite parameters")
        if self.var < 0:
            raise NumericalError("predictive variance is negative")


@dataclass(frozen=True, eq=False)
class PredictiveLaw:
    """Probability vector over hard labels."""

    class_probs: np.ndarray

    def __post_init__(self):
        p = self.class_probs
        if np.any(p < -1e-9) or np.any(p > 1 + 1e-9) or abs(p.sum() - 1.0) > 1e-9:
            raise ValueError("class_probs must be a probability vector")

    @classmethod
    def degenerate(cls, label: int, num_classes: int) -> "PredictiveLaw":
        p = np.zeros(num_classes)
        p[label] = 1.0
        return cls(p)

    @property
    def top_label(self) -> int:
        return int(np.argmax(self.class_probs))

    @property
    def top_prob(self) -> float:
        return float(self.class_probs.max())

    def to_list(self) -> list[float]:
        return [float(p) for p in self.class_probs]


def _assemble(x_known_idx, x_known_values, fill_idx, fill_values, dim: int) -> np.ndarray:
    x = np.zeros(dim)
    x[np.asarray(x_known_idx, dtype=int)] = x_known_values
    if len(fill_idx):
        x[np.asarray(fill_idx, dtype=int)] = fill_values
    return x


def linear_soft_law(
    model: LinearModel,
    stats: GaussianStats,
    known_idx,
    known_values,
    unrevealed_idx,
    factor_cache: FactorCache | None = None,
) -> PredictiveGaussian:
    """Exact Gaussian law of a binary linear score given the revealed block.

    known_idx covers everything observed (public features plus revealed
    sensitive ones); unrevealed_idx is the remaining sensitive set.
    """
    if not model.is_binary:
        raise ValueError("linear_soft_law applies to binary linear models only")
    known_idx = tuple(int(i) for i in known_idx)
    unrevealed = tuple(int(i) for i in unrevealed_idx)
    known_values = np.asarray(known_values, dtype=float)
    base = float(model.theta[list(known_idx)] @ known_values + model.bias)
    if not unrevealed:
        return PredictiveGaussian(base, 0.0)
    cond = condition(stats, unrevealed, known_idx, known_values, factor_cache)
    theta_u = model.theta[list(unrevealed)]
    mean = base + float(theta_u @ cond.mean)
    var = float(theta_u @ cond.cov @ theta_u)
    return PredictiveGaussian(mean, max(var, 0.0))


def threshold_law(pg: PredictiveGaussian) -> PredictiveLaw:
    """Bernoulli law of the thresholded score: P(class 1) = Phi(mean / std).

    A zero-variance score degenerates to the indicator of mean >= 0,
    matching the hard-label convention.
    """
    if pg.var == 0.0:
        p1 = 1.0 if pg.mean >= 0.0 else 0.0
    else:
        p1 = float(ndtr(pg.mean / np.sqrt(pg.var)))
    return PredictiveLaw(np.array([1.0 - p1, p1]))


def taylor_soft_law(
    model: Model,
    cond: ConditionalGaussian,
    known_idx,
    known_values,
) -> PredictiveGaussian:
    """First-order Gaussian approximation of a binary score under the posterior.

    The score is linearized at the posterior mean of the unrevealed block:
    mean is the plug-in prediction there and variance is g' cov g for the
    input gradient g restricted to the unrevealed coordinates. Exact when
    the network is affine over the sampled region.
    """
    if not model.is_binary:
        raise ValueError("taylor_soft_law applies to binary models only")
    unrevealed = list(cond.target_idx)
    x = _assemble(known_idx, known_values, unrevealed, cond.mean, model.num_features)
    mean = float(soft_predict(model, x))
    if not unrevealed:
        return PredictiveGaussian(mean, 0.0)
    g = input_gradient(model, x)[unrevealed]
    var = float(g @ cond.cov @ g)
    return PredictiveGaussian(mean, max(var, 0.0))


def multiclass_law(
    model: Model,
    cond: ConditionalGaussian,
    known_idx,
    known_values,
    num_samples: int,
    seed: int,
) -> PredictiveLaw:
    """Monte Carlo law of the hard label: posterior samples of the unrevealed
    block are pushed through the model and counted per class."""
    if num_samples < 1:
        raise ValueError("num_samples must be at least 1")
    unrevealed = np.asarray(cond.target_idx, dtype=int)
    x = _assemble(known_idx, known_values, unrevealed, cond.mean, model.num_features)
    if len(unrevealed) == 0:
        return PredictiveLaw.degenerate(hard_predict(model, x), model.num_classes)
    draws = sample(cond, num_samples, seed)
    batch = np.tile(x, (num_samples, 1))
    batch[:, unrevealed] = draws
    counts = np.bincount(hard_predict(model, batch), minlength=model.num_classes)
    return PredictiveLaw(counts / num_samples)


def entropy(law: PredictiveLaw) -> float:
    """Shannon entropy in nats, with 0 log 0 treated as 0."""
    p = law.class_probs
    return float(-(p * np.log(np.clip(p, PROB_FLOOR, 1.0))).sum())


def bernoulli_entropy(p) -> np.ndarray:
    """Vectorized entropy of Bernoulli(p) laws; used in the scoring loop."""
    p = np.asarray(p, dtype=float)
    q = 1.0 - p
    return -(p * np.log(np.clip(p, PROB_FLOOR, 1.0)) + q * np.log(np.clip(q, PROB_FLOOR, 1.0)))
