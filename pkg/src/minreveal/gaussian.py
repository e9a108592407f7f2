"""Joint Gaussian model of the features and conditional posteriors.

The feature vector is modeled as N(mu, sigma) estimated from training data.
Conditioning any unrevealed subset on revealed values uses the Schur
complement:

    mean = mu_U + S_UR S_RR^{-1} (x_R - mu_R)
    cov  = S_UU - S_UR S_RR^{-1} S_RU

S_RR is never inverted explicitly; a Cholesky factorization solve is used,
and factors can be cached per revealed index set since the engine grows the
revealed set one index at a time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .data import Dataset
from .errors import NumericalError

DEFAULT_RIDGE = 1e-6

# cache type: tuple of given indices -> cho_factor output for sigma[R, R]
FactorCache = dict


@dataclass(frozen=True, eq=False)
class GaussianStats:
    """Mean vector and (ridge-regularized) covariance of the features."""

    mu: np.ndarray
    sigma: np.ndarray
    ridge: float

    def __post_init__(self):
        if self.sigma.shape != (self.dim, self.dim):
            raise ValueError("sigma must be square and match mu")
        if not np.allclose(self.sigma, self.sigma.T, atol=1e-9):
            raise ValueError("sigma must be symmetric within 1e-9")
        if self.ridge < 0:
            raise ValueError("ridge must be nonnegative")

    @property
    def dim(self) -> int:
        return len(self.mu)

    def to_json(self) -> str:
        return json.dumps(
            {"mu": self.mu.tolist(), "sigma": self.sigma.tolist(), "ridge": self.ridge},
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "GaussianStats":
        doc = json.loads(text)
        return cls(np.asarray(doc["mu"], dtype=float), np.asarray(doc["sigma"], dtype=float), float(doc["ridge"]))


@dataclass(frozen=True, eq=False)
class ConditionalGaussian:
    """N(mean, cov) over the features indexed by target_idx."""

    target_idx: tuple[int, ...]
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        k = len(self.target_idx)
        if self.mean.shape != (k,) or self.cov.shape != (k, k):
            raise ValueError("mean/cov shapes must match target_idx")
        if not np.all(np.isfinite(self.mean)) or not np.all(np.isfinite(self.cov)):
            raise NumericalError("conditional distribution has non-finite moments")


def estimate(train: Dataset, ridge: float = DEFAULT_RIDGE) -> GaussianStats:
    """Sample mean and covariance (normalized by n) plus ridge on the diagonal."""
    if train.num_rows < 2:
        raise ValueError("need at least 2 rows to estimate a covariance")
    x = train.features
    mu = x.mean(axis=0)
    centered = x - mu
    sigma = centered.T @ centered / x.shape[0]
    sigma = (sigma + sigma.T) / 2.0 + ridge * np.eye(x.shape[1])
    return GaussianStats(mu, sigma, ridge)


def _factor(stats: GaussianStats, given_idx: tuple[int, ...], cache: FactorCache | None):
    if cache is not None and given_idx in cache:
        return cache[given_idx]
    sub = stats.sigma[np.ix_(given_idx, given_idx)]
    try:
        factor = cho_factor(sub, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"covariance block for indices {given_idx} is not positive definite") from exc
    if cache is not None:
        cache[given_idx] = factor
    return factor


def condition(
    stats: GaussianStats,
    target_idx,
    given_idx,
    given_values,
    factor_cache: FactorCache | None = None,
) -> ConditionalGaussian:
    """Conditional law of the target features given observed values.

    With an empty given set this is just the marginal N(mu_U, sigma_UU).
    """
    target = tuple(int(i) for i in target_idx)
    given = tuple(int(i) for i in given_idx)
    values = np.asarray(given_values, dtype=float)
    if set(target) & set(given):
        raise ValueError("target and given index sets overlap")
    for i in target + given:
        if not 0 <= i < stats.dim:
            raise ValueError(f"feature index {i} out of range")
    if values.shape != (len(given),):
        raise ValueError("given_values length must match given_idx")

    t = np.asarray(target, dtype=int)
    if not given:
        return ConditionalGaussian(target, stats.mu[t].copy(), stats.sigma[np.ix_(t, t)].copy())

    g = np.asarray(given, dtype=int)
    factor = _factor(stats, given, factor_cache)
    cross = stats.sigma[np.ix_(t, g)]
    # solve S_RR w = (x_R - mu_R) and S_RR B = S_RU in one factorization
    gain = cho_solve(factor, cross.T)  # S_RR^{-1} S_RU, shape (|R|, |U'|)
    mean = stats.mu[t] + gain.T @ (values - stats.mu[g])
    cov = stats.sigma[np.ix_(t, t)] - cross @ gain
    cov = (cov + cov.T) / 2.0
    return ConditionalGaussian(target, mean, cov)


def covariance_root(cov: np.ndarray) -> np.ndarray:
    """A matrix L with L L^T = cov; eigenvalues are clamped at zero.

    Cholesky is tried first; semidefinite matrices (exact zeros, tiny
    negative eigenvalues from the Schur complement) fall back to a
    symmetric eigendecomposition.
    """
    if cov.size == 0:
        return cov.copy()
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        eigvals, eigvecs = np.linalg.eigh(cov)
        return eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))


def sample(cond: ConditionalGaussian, count: int, seed: int) -> np.ndarray:
    """Draw count i.i.d. rows from the conditional. Not clipped to [-1, 1]."""
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = np.random.default_rng(seed)
    k = len(cond.target_idx)
    z = rng.standard_normal((count, k))
    return cond.mean + z @ covariance_root(cond.cov).T
