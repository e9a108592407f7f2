"""Sequential disclosure protocol.

Starting from the public features alone, the engine repeatedly checks
whether the revealed set already certifies the prediction, and if not asks
for one more sensitive feature. Candidates are ranked by expected negative
entropy of the prediction after a hypothetical reveal: for each candidate
j, values z are sampled from its posterior given everything observed, the
predictive law of the model output with j set to z is computed, and the
entropies are averaged. Higher is better; a feature whose revelation pins
the prediction scores exactly 0, the maximum.

Alternative selectors: a static feature-importance order (weight magnitudes
of a logistic fit on all features) and a seeded random order. All selectors
share the same termination test.

Every random stream is derived from (config.seed, purpose, step index,
feature index), so scoring one candidate never perturbs another's samples
and runs replay byte-identically.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import ndtr

from .coreset import CoreSetQuery, CoreSetResult, run_core_test
from .data import FeaturePartition
from .errors import NumericalError
from .gaussian import (
    ConditionalGaussian,
    FactorCache,
    GaussianStats,
    condition,
    covariance_root,
)
from .models import LinearModel, Model, hard_predict, input_gradient, soft_predict
from .predictive import PROB_FLOOR, bernoulli_entropy, entropy

logger = logging.getLogger(__name__)

SELECTORS = ("fscore", "importance", "random")

_SCORE, _SELECT, _TEST, _WHATIF = range(4)


def derived_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent, reproducible stream for one (purpose, step, feature) slot."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=tuple(key)))


@dataclass(frozen=True, eq=False)
class EngineConfig:
    delta: float = 0.0
    selector: str = "fscore"
    mc_samples: int = 100
    probe_samples: int = 100_000
    seed: int = 0
    importance: np.ndarray | None = None

    def __post_init__(self):
        if not 0.0 <= self.delta < 0.5:
            raise ValueError("delta must lie in [0, 0.5)")
        if self.selector not in SELECTORS:
            raise ValueError(f"selector must be one of {SELECTORS}")
        if self.mc_samples < 1 or self.probe_samples < 1:
            raise ValueError("sample counts must be positive")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")


@dataclass(frozen=True)
class StepRecord:
    """One reveal: the candidate scores seen, the chosen feature and its value,
    and the prediction law's entropy/confidence after the reveal."""

    chosen: int
    value: float
    scores: dict[int, float]
    entropy_after: float
    confidence_after: float

    def to_dict(self) -> dict:
        return {
            "chosen": self.chosen,
            "value": self.value,
            "scores": {str(k): v for k, v in sorted(self.scores.items())},
            "entropy_after": self.entropy_after,
            "confidence_after": self.confidence_after,
        }


@dataclass(frozen=True, eq=False)
class Session:
    """Evolving revealed/unrevealed split for one individual.

    Immutable; Engine.step returns an updated copy. The factor cache is
    shared across copies (it only memoizes index-set factorizations).
    """

    partition: FeaturePartition
    public_values: np.ndarray
    revealed: tuple[tuple[int, float], ...]
    unrevealed: tuple[int, ...]
    pending: int | None
    pending_scores: dict[int, float]
    log: tuple[StepRecord, ...]
    terminal: CoreSetResult | None
    confidence: float
    cache: FactorCache = field(default_factory=dict, repr=False)

    @property
    def step_index(self) -> int:
        return len(self.revealed)

    @property
    def revealed_sorted(self) -> tuple[tuple[int, ...], np.ndarray]:
        pairs = sorted(self.revealed)
        return tuple(i for i, _ in pairs), np.array([v for _, v in pairs], dtype=float)

    def to_dict(self) -> dict:
        idx, _ = self.revealed_sorted
        return {
            "public_idx": list(self.partition.public_idx),
            "sensitive_idx": list(self.partition.sensitive_idx),
            "public_values": [float(v) for v in self.public_values],
            "revealed": [{"feature": i, "value": float(v)} for i, v in self.revealed],
            "unrevealed": list(self.unrevealed),
            "pending": self.pending,
            "log": [r.to_dict() for r in self.log],
            "terminal": self.terminal.to_dict() if self.terminal else None,
            "confidence": self.confidence,
        }


class Engine:
    """Binds a trained model, feature statistics, a partition and a config."""

    def __init__(self, model: Model, stats: GaussianStats, partition: FeaturePartition, config: EngineConfig):
        if model.num_features != stats.dim or partition.num_features != stats.dim:
            raise ValueError("model, stats and partition disagree on feature count")
        self.model = model
        self.stats = stats
        self.partition = partition
        self.config = config

    # -- session lifecycle -------------------------------------------------

    def begin(self, public_values, cache: FactorCache | None = None) -> Session:
        """Open a session from public features; it may be decided at birth.

        An externally supplied factor cache lets batch callers share
        covariance factorizations across many sessions.
        """
        public_values = np.asarray(public_values, dtype=float)
        session = Session(
            partition=self.partition,
            public_values=public_values,
            revealed=(),
            unrevealed=tuple(self.partition.sensitive_idx),
            pending=None,
            pending_scores={},
            log=(),
            terminal=None,
            confidence=0.0,
            cache=cache if cache is not None else {},
        )
        result = self._evaluate(session)
        session = replace(session, confidence=result.confidence)
        return self._settle(session, result)

    def step(self, session: Session, value: float) -> Session:
        """Reveal the pending feature with the given value and re-test."""
        if session.terminal is not None:
            raise ValueError("session is already decided")
        if session.pending is None:
            raise ValueError("session has no pending feature request")
        value = float(value)
        if not np.isfinite(value):
            raise ValueError("revealed value must be finite")
        if abs(value) > 1.0:
            logger.warning("revealed value %.4g outside [-1, 1]; clipping", value)
            value = float(np.clip(value, -1.0, 1.0))

        j = session.pending
        session = replace(
            session,
            revealed=session.revealed + ((j, value),),
            unrevealed=tuple(i for i in session.unrevealed if i != j),
            pending=None,
        )
        result = self._evaluate(session)
        record = StepRecord(
            chosen=j,
            value=value,
            scores=session.pending_scores,
            entropy_after=entropy(result.law),
            confidence_after=result.confidence,
        )
        session = replace(session, log=session.log + (record,), pending_scores={}, confidence=result.confidence)
        return self._settle(session, result)

    def run_auto(self, x_full, cache: FactorCache | None = None) -> tuple[Session, CoreSetResult]:
        """Drive a session to termination, reading values from a full vector."""
        x_full = np.asarray(x_full, dtype=float)
        if x_full.shape != (self.stats.dim,):
            raise ValueError("x_full must cover every feature")
        session = self.begin(x_full[list(self.partition.public_idx)], cache=cache)
        for _ in range(len(self.partition.sensitive_idx)):
            if session.terminal is not None:
                break
            session = self.step(session, x_full[session.pending])
        assert session.terminal is not None
        return session, session.terminal

    def whatif(self, session: Session, j: int, value: float) -> CoreSetResult:
        """Core test as if feature j were revealed with the given value.

        Read-only: the session is not touched. j may be any unrevealed
        feature, not just the pending request.
        """
        if session.terminal is not None:
            raise ValueError("session is already decided")
        if j not in session.unrevealed:
            raise ValueError(f"feature {j} is not an unrevealed sensitive feature")
        value = float(np.clip(value, -1.0, 1.0))
        idx, values = session.revealed_sorted
        merged = sorted(zip(idx + (j,), np.append(values, value)))
        query = CoreSetQuery(
            model=self.model,
            stats=self.stats,
            partition=session.partition,
            public_values=session.public_values,
            revealed_idx=tuple(i for i, _ in merged),
            revealed_values=np.array([v for _, v in merged]),
            delta=self.config.delta,
        )
        seed = int(derived_rng(self.config.seed, _WHATIF, session.step_index, j).integers(2**63))
        return run_core_test(
            query,
            probe_samples=self.config.probe_samples,
            law_samples=self.config.probe_samples,
            seed=seed,
            factor_cache=session.cache,
        )

    # -- scoring and selection ---------------------------------------------

    def score_feature(self, session: Session, j: int) -> float:
        """Expected negative entropy of the prediction after revealing j."""
        if j not in session.unrevealed:
            raise ValueError(f"feature {j} is not unrevealed")
        posterior = self._step_posterior(session)
        return self._score_from_posterior(session, posterior, j)

    def score_all(self, session: Session) -> dict[int, float]:
        posterior = self._step_posterior(session)
        return {j: self._score_from_posterior(session, posterior, j) for j in session.unrevealed}

    def select_next(self, session: Session) -> tuple[int, dict[int, float]]:
        """Pick the next feature to request under the configured selector."""
        if session.terminal is not None:
            raise ValueError("session is already decided")
        if not session.unrevealed:
            raise ValueError("no unrevealed features left")
        selector = self.config.selector
        if selector == "fscore":
            scores = self.score_all(session)
        elif selector == "importance":
            weights = self._importance_weights()
            scores = {j: float(weights[j]) for j in session.unrevealed}
        else:
            rng = derived_rng(self.config.seed, _SELECT, session.step_index)
            choice = int(rng.choice(np.asarray(session.unrevealed)))
            return choice, {}
        best = None
        for j in session.unrevealed:
            if best is None or scores[j] > scores[best]:
                best = j
        return best, scores

    def _importance_weights(self) -> np.ndarray:
        if self.config.importance is not None:
            return np.asarray(self.config.importance, dtype=float)
        if isinstance(self.model, LinearModel):
            theta = self.model.theta
            return np.abs(theta) if theta.ndim == 1 else np.linalg.norm(theta, axis=0)
        raise ValueError("importance selector needs explicit importance weights for nonlinear models")

    # -- internals -----------------------------------------------------------

    def _known(self, session: Session) -> tuple[tuple[int, ...], np.ndarray]:
        idx, values = session.revealed_sorted
        pairs = sorted(zip(self.partition.public_idx + idx, np.append(session.public_values, values)))
        return tuple(int(i) for i, _ in pairs), np.array([v for _, v in pairs], dtype=float)

    def _query(self, session: Session) -> CoreSetQuery:
        idx, values = session.revealed_sorted
        return CoreSetQuery(
            model=self.model,
            stats=self.stats,
            partition=session.partition,
            public_values=session.public_values,
            revealed_idx=idx,
            revealed_values=values,
            delta=self.config.delta,
        )

    def _evaluate(self, session: Session) -> CoreSetResult:
        seed = int(derived_rng(self.config.seed, _TEST, session.step_index).integers(2**63))
        return run_core_test(
            self._query(session),
            probe_samples=self.config.probe_samples,
            law_samples=self.config.probe_samples,
            seed=seed,
            factor_cache=session.cache,
        )

    def _settle(self, session: Session, result: CoreSetResult) -> Session:
        if result.is_core:
            return replace(session, terminal=result, pending=None, pending_scores={})
        if not session.unrevealed:
            raise NumericalError("no features left to reveal but the state does not certify")
        chosen, scores = self.select_next(session)
        return replace(session, pending=chosen, pending_scores=scores)

    def _step_posterior(self, session: Session) -> ConditionalGaussian:
        known_idx, known_values = self._known(session)
        return condition(self.stats, session.unrevealed, known_idx, known_values, session.cache)

    def _score_from_posterior(self, session: Session, posterior: ConditionalGaussian, j: int) -> float:
        """Average prediction entropy over sampled values of candidate j.

        Works inside the joint posterior of the unrevealed block: sampling
        z for j uses its marginal there, and fixing j = z updates the rest
        by one rank-one Schur step. The law per z is then exact (linear),
        first-order (binary MLP), or Monte Carlo (multi-class).
        """
        cfg = self.config
        unrevealed = list(session.unrevealed)
        a = unrevealed.index(j)
        rest_pos = [p for p in range(len(unrevealed)) if p != a]
        rest_idx = [unrevealed[p] for p in rest_pos]
        mean_j = posterior.mean[a]
        var_j = max(float(posterior.cov[a, a]), 0.0)

        rng = derived_rng(cfg.seed, _SCORE, session.step_index, j)
        z = mean_j + np.sqrt(var_j) * rng.standard_normal(cfg.mc_samples)

        rest_mean = posterior.mean[rest_pos]
        rest_cov = posterior.cov[np.ix_(rest_pos, rest_pos)]
        if var_j > 0.0 and rest_pos:
            cross = posterior.cov[rest_pos, a]
            means = rest_mean + np.outer(z - mean_j, cross / var_j)
            rest_cov = rest_cov - np.outer(cross, cross) / var_j
        else:
            means = np.tile(rest_mean, (cfg.mc_samples, 1))

        known_idx, known_values = self._known(session)
        model = self.model
        if isinstance(model, LinearModel) and model.is_binary:
            base = float(model.theta[list(known_idx)] @ known_values + model.bias) + model.theta[j] * z
            theta_rest = model.theta[rest_idx]
            m = base + means @ theta_rest if rest_idx else base
            var = max(float(theta_rest @ rest_cov @ theta_rest), 0.0) if rest_idx else 0.0
            if var == 0.0:
                probs = (m >= 0.0).astype(float)
            else:
                probs = ndtr(m / np.sqrt(var))
            return float(-bernoulli_entropy(probs).mean())

        batch = np.zeros((cfg.mc_samples, model.num_features))
        batch[:, list(known_idx)] = known_values
        batch[:, j] = z
        if rest_idx:
            batch[:, rest_idx] = means

        if model.is_binary:
            m = np.asarray(soft_predict(model, batch), dtype=float)
            if rest_idx:
                grads = input_gradient(model, batch)[:, rest_idx]
                var = np.clip(np.einsum("ti,ij,tj->t", grads, rest_cov, grads), 0.0, None)
            else:
                var = np.zeros(cfg.mc_samples)
            sd = np.sqrt(var)
            probs = np.where(sd > 0.0, ndtr(np.divide(m, sd, out=np.zeros_like(m), where=sd > 0.0)), m >= 0.0)
            return float(-bernoulli_entropy(probs).mean())

        # multi-class: inner Monte Carlo per sampled z
        if not rest_idx:
            return 0.0  # revealing the last feature leaves a point-mass law
        inner = cfg.mc_samples
        root = covariance_root(rest_cov)
        noise = rng.standard_normal((cfg.mc_samples, inner, len(rest_idx)))
        draws = means[:, None, :] + noise @ root.T
        wide = np.repeat(batch, inner, axis=0)
        wide[:, rest_idx] = draws.reshape(-1, len(rest_idx))
        preds = hard_predict(model, wide).reshape(cfg.mc_samples, inner)
        total = 0.0
        for row in preds:
            p = np.bincount(row, minlength=model.num_classes) / inner
            total += float(-(p * np.log(np.clip(p, PROB_FLOOR, 1.0))).sum())
        return -total / cfg.mc_samples
