"""Deciding whether a revealed feature set pins down the prediction.

Two kinds of certificate exist. A pure (delta = 0) certificate demands the
prediction stay constant for every completion of the unrevealed features:
binary linear models get an exact interval test over the [-1, 1] box, and
anything else gets an approximate sampled constancy check whose "not core"
answer is always sound. A delta > 0 certificate only demands the top class
carry probability at least 1 - delta under the predictive law.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .data import FeaturePartition
from .gaussian import FactorCache, GaussianStats, condition, sample
from .models import LinearModel, Model, hard_predict
from .predictive import (
    PredictiveLaw,
    linear_soft_law,
    multiclass_law,
    taylor_soft_law,
    threshold_law,
)

OPTIMAL_MAX_SENSITIVE = 20
DEFAULT_PROBES = 100_000


@dataclass(frozen=True, eq=False)
class CoreSetQuery:
    """One individual's revealed state plus the decision tolerance."""

    model: Model
    stats: GaussianStats
    partition: FeaturePartition
    public_values: np.ndarray
    revealed_idx: tuple[int, ...]
    revealed_values: np.ndarray
    delta: float

    def __post_init__(self):
        if not 0.0 <= self.delta < 0.5:
            raise ValueError("delta must lie in [0, 0.5)")
        sensitive = set(self.partition.sensitive_idx)
        if not set(self.revealed_idx) <= sensitive:
            raise ValueError("revealed indices must be sensitive features")
        if len(self.revealed_values) != len(self.revealed_idx):
            raise ValueError("revealed_values length must match revealed_idx")
        if len(self.public_values) != len(self.partition.public_idx):
            raise ValueError("public_values length must match the public index set")

    @property
    def unrevealed_idx(self) -> tuple[int, ...]:
        return tuple(i for i in self.partition.sensitive_idx if i not in set(self.revealed_idx))

    def known(self) -> tuple[tuple[int, ...], np.ndarray]:
        """Observed block: public indices plus revealed sensitive ones, sorted."""
        pairs = sorted(
            list(zip(self.partition.public_idx, self.public_values))
            + list(zip(self.revealed_idx, self.revealed_values))
        )
        idx = tuple(int(i) for i, _ in pairs)
        values = np.array([v for _, v in pairs], dtype=float)
        return idx, values


@dataclass(frozen=True, eq=False)
class CoreSetResult:
    """Verdict plus the certificate's label and confidence.

    confidence is the top class probability under the predictive law; a
    passing pure test reports 1.0. The law itself is kept for entropy
    bookkeeping and display.
    """

    is_core: bool
    label: int | None
    confidence: float
    law: PredictiveLaw

    def __post_init__(self):
        if self.is_core and self.label is None:
            raise ValueError("a core verdict needs a representative label")
        # plain python scalars: results flow into JSON responses
        object.__setattr__(self, "is_core", bool(self.is_core))
        object.__setattr__(self, "label", None if self.label is None else int(self.label))
        object.__setattr__(self, "confidence", float(self.confidence))

    def to_dict(self) -> dict:
        return {"is_core": self.is_core, "label": self.label, "confidence": self.confidence}


def _distributional_law(
    query: CoreSetQuery,
    law_samples: int,
    seed: int,
    factor_cache: FactorCache | None,
) -> PredictiveLaw:
    """Predictive law of the hard label given the revealed state."""
    known_idx, known_values = query.known()
    unrevealed = query.unrevealed_idx
    model = query.model
    if model.is_binary:
        if isinstance(model, LinearModel):
            pg = linear_soft_law(model, query.stats, known_idx, known_values, unrevealed, factor_cache)
        else:
            cond = condition(query.stats, unrevealed, known_idx, known_values, factor_cache)
            pg = taylor_soft_law(model, cond, known_idx, known_values)
        return threshold_law(pg)
    cond = condition(query.stats, unrevealed, known_idx, known_values, factor_cache)
    return multiclass_law(model, cond, known_idx, known_values, law_samples, seed)


def test_pure_linear(query: CoreSetQuery, factor_cache: FactorCache | None = None) -> CoreSetResult:
    """Exact pure test for binary linear models over the [-1, 1] box.

    With c the revealed contribution (bias folded in) and w the l1 norm of
    the unrevealed weights, the score ranges over [c - w, c + w]; the set is
    core exactly when that interval does not straddle zero. c - w = 0 counts
    as label 1, matching the score >= 0 convention.
    """
    model = query.model
    if not (isinstance(model, LinearModel) and model.is_binary):
        raise ValueError("test_pure_linear needs a binary linear model")
    known_idx, known_values = query.known()
    unrevealed = list(query.unrevealed_idx)
    c = float(model.theta[list(known_idx)] @ known_values + model.bias)
    w = float(np.abs(model.theta[unrevealed]).sum())
    if c - w >= 0.0:
        label = 1
    elif c + w < 0.0:
        label = 0
    else:
        law = _distributional_law(query, law_samples=1, seed=0, factor_cache=factor_cache)
        return CoreSetResult(False, None, law.top_prob, law)
    return CoreSetResult(True, label, 1.0, PredictiveLaw.degenerate(label, 2))


def test_pure_nonlinear(
    query: CoreSetQuery,
    num_probe: int = DEFAULT_PROBES,
    seed: int = 0,
    factor_cache: FactorCache | None = None,
) -> CoreSetResult:
    """Sampled constancy test: core if the prediction agrees on num_probe
    posterior draws and on the posterior-mean plug-in point.

    Approximate and one-sided: "not core" is always sound, "core" may be
    optimistic.
    """
    if num_probe < 1:
        raise ValueError("num_probe must be at least 1")
    known_idx, known_values = query.known()
    unrevealed = np.asarray(query.unrevealed_idx, dtype=int)
    model = query.model
    x = np.zeros(model.num_features)
    x[np.asarray(known_idx, dtype=int)] = known_values
    if len(unrevealed) == 0:
        label = hard_predict(model, x)
        return CoreSetResult(True, label, 1.0, PredictiveLaw.degenerate(label, model.num_classes))
    cond = condition(query.stats, tuple(unrevealed), known_idx, known_values, factor_cache)
    draws = sample(cond, num_probe, seed)
    batch = np.tile(x, (num_probe + 1, 1))
    batch[0, unrevealed] = cond.mean
    batch[1:, unrevealed] = draws
    preds = hard_predict(model, batch)
    counts = np.bincount(preds, minlength=model.num_classes)
    if counts.max() == len(preds):
        label = int(np.argmax(counts))
        return CoreSetResult(True, label, 1.0, PredictiveLaw.degenerate(label, model.num_classes))
    law = PredictiveLaw(counts / len(preds))
    return CoreSetResult(False, None, law.top_prob, law)


def test_delta(
    query: CoreSetQuery,
    law_samples: int = 10_000,
    seed: int = 0,
    factor_cache: FactorCache | None = None,
) -> CoreSetResult:
    """Probabilistic test: core when the top class probability reaches 1 - delta."""
    if query.delta <= 0.0:
        raise ValueError("test_delta needs delta > 0; use a pure test for delta = 0")
    law = _distributional_law(query, law_samples, seed, factor_cache)
    if law.top_prob >= 1.0 - query.delta:
        return CoreSetResult(True, law.top_label, law.top_prob, law)
    return CoreSetResult(False, None, law.top_prob, law)


def run_core_test(
    query: CoreSetQuery,
    probe_samples: int = DEFAULT_PROBES,
    law_samples: int = 10_000,
    seed: int = 0,
    factor_cache: FactorCache | None = None,
) -> CoreSetResult:
    """Dispatch to the applicable certificate for the query's model and delta.

    delta = 0 with a binary linear model gets the exact interval test; any
    other delta = 0 case falls back to the sampled constancy test. delta > 0
    always uses the predictive-law test.
    """
    if query.delta > 0.0:
        return test_delta(query, law_samples, seed, factor_cache)
    if isinstance(query.model, LinearModel) and query.model.is_binary:
        return test_pure_linear(query, factor_cache)
    return test_pure_nonlinear(query, probe_samples, seed, factor_cache)


def optimal_min_core(
    model: Model,
    stats: GaussianStats,
    partition: FeaturePartition,
    x_full: np.ndarray,
    delta: float,
    probe_samples: int = DEFAULT_PROBES,
    law_samples: int = 10_000,
    seed: int = 0,
) -> tuple[tuple[int, ...], int]:
    """Brute-force minimum core set: enumerate subsets of the sensitive set by
    size (ties lexicographic) and return the first that certifies.

    Needs every sensitive value up front, so it is a lower-bound baseline
    rather than a deployable protocol.
    """
    sensitive = partition.sensitive_idx
    if len(sensitive) > OPTIMAL_MAX_SENSITIVE:
        raise ValueError(
            f"optimal search over {len(sensitive)} sensitive features exceeds the "
            f"2^{OPTIMAL_MAX_SENSITIVE} budget guard"
        )
    x_full = np.asarray(x_full, dtype=float)
    public_values = x_full[list(partition.public_idx)]
    cache: FactorCache = {}
    for size in range(len(sensitive) + 1):
        for subset in itertools.combinations(sensitive, size):
            query = CoreSetQuery(
                model,
                stats,
                partition,
                public_values,
                subset,
                x_full[list(subset)],
                delta,
            )
            result = run_core_test(query, probe_samples, law_samples, seed, cache)
            if result.is_core:
                return subset, int(result.label)
    return tuple(sensitive), int(hard_predict(model, x_full))
