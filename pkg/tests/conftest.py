import numpy as np
import pytest

from minreveal.data import apply_normalizer, fit_normalizer, sample_partition, split
from minreveal.datasets import load_bundled
from minreveal.gaussian import GaussianStats, estimate
from minreveal.models import LinearModel, TrainConfig, train_logistic, train_mlp


@pytest.fixture(scope="session")
def loan_model():
    """The motivating loan example: approve iff 1.0*job - 0.5*loc + 0.5*inc >= 0."""
    return LinearModel(np.array([1.0, -0.5, 0.5]), 0.0, num_classes=2)


@pytest.fixture(scope="session")
def loan_stats():
    # loc has much higher marginal variance than inc, so revealing loc is
    # strictly more informative and the selector's choice is deterministic
    return GaussianStats(np.zeros(3), np.diag([1.0, 1.0, 0.04]), ridge=0.0)


@pytest.fixture(scope="session")
def loan_partition():
    from minreveal.data import FeaturePartition

    return FeaturePartition(public_idx=(0,), sensitive_idx=(1, 2))


@pytest.fixture(scope="session")
def synthetic_split():
    raw = load_bundled("synthetic_linear")
    train_raw, test_raw = split(raw, 0.7, 0)
    norm = fit_normalizer(train_raw)
    return apply_normalizer(norm, train_raw), apply_normalizer(norm, test_raw)

@pytest.fixture(scope="session")
def synthetic_train(synthetic_split):
    return synthetic_split[0]


@pytest.fixture(scope="session")
def synthetic_test(synthetic_split):
    return synthetic_split[1]


@pytest.fixture(scope="session")
def synthetic_logistic(synthetic_train):
    return train_logistic(synthetic_train, TrainConfig.logistic(seed=0))


@pytest.fixture(scope="session")
def synthetic_stats(synthetic_train):
    return estimate(synthetic_train)


@pytest.fixture(scope="session")
def bank_split():
    raw = load_bundled("bank_like")
    train_raw, test_raw = split(raw, 0.7, 0)
    norm = fit_normalizer(train_raw)
    return apply_normalizer(norm, train_raw), apply_normalizer(norm, test_raw)


@pytest.fixture(scope="session")
def bank_mlp(bank_split):
    # lr raised above the serving default: plain SGD at 0.001 underfits at
    # this desk-scale sample count
    return train_mlp(bank_split[0], TrainConfig.mlp(seed=0, lr=0.01))


@pytest.fixture(scope="session")
def bank_stats(bank_split):
    return estimate(bank_split[0])


def loan_normalizer():
    """Identity normalizer: the loan example works directly in [-1, 1]."""
    from minreveal.data import NormalizationSpec

    return NormalizationSpec(("job", "loc", "inc"), np.array([-1.0, -1.0, -1.0]), np.array([1.0, 1.0, 1.0]))


def write_loan_artifacts(dirpath):
    """Write model.json/stats.json/normalizer.json for the loan example."""
    import json
    from pathlib import Path

    from minreveal.models import model_to_json

    model = LinearModel(np.array([1.0, -0.5, 0.5]), 0.0, num_classes=2)
    stats = GaussianStats(np.zeros(3), np.diag([1.0, 1.0, 0.04]), ridge=0.0)
    doc = json.loads(model_to_json(model))
    doc["importance"] = [1.0, 0.5, 0.5]
    dirpath = Path(dirpath)
    dirpath.mkdir(parents=True, exist_ok=True)
    (dirpath / "model.json").write_text(json.dumps(doc, indent=2))
    (dirpath / "stats.json").write_text(stats.to_json())
    (dirpath / "normalizer.json").write_text(loan_normalizer().to_json())
    return dirpath


def random_spd_stats(rng: np.random.Generator, dim: int, ridge: float = 1e-6) -> GaussianStats:
    """Random well-conditioned Gaussian stats for property tests."""
    a = rng.normal(size=(dim, dim))
    sigma = a @ a.T / dim + 0.3 * np.eye(dim)
    sigma = (sigma + sigma.T) / 2 + ridge * np.eye(dim)
    mu = rng.normal(scale=0.3, size=dim)
    return GaussianStats(mu, sigma, ridge)


def random_partition(rng: np.random.Generator, dim: int, num_sensitive: int):
    return sample_partition(dim, num_sensitive, int(rng.integers(2**31)))
