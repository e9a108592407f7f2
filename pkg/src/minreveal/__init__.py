"""Minimal-disclosure inference for tabular classifiers.

Given a trained model and a public/sensitive feature split, decide per
individual which sensitive features must be revealed so the prediction is
determined exactly (delta = 0) or with probability at least 1 - delta,
and reveal them one at a time in the most informative order.
"""

from .coreset import CoreSetQuery, CoreSetResult, optimal_min_core, run_core_test
from .data import Dataset, FeaturePartition, NormalizationSpec
from .engine import Engine, EngineConfig, Session
from .gaussian import GaussianStats, condition, estimate
from .models import LinearModel, MlpModel, train_logistic, train_mlp
from .predictive import PredictiveGaussian, PredictiveLaw, entropy

__version__ = "0.1.0"

__all__ = [
    "CoreSetQuery",
    "CoreSetResult",
    "Dataset",
    "Engine",
    "EngineConfig",
    "FeaturePartition",
    "GaussianStats",
    "LinearModel",
    "MlpModel",
    "NormalizationSpec",
    "PredictiveGaussian",
    "PredictiveLaw",
    "Session",
    "condition",
    "entropy",
    "estimate",
    "optimal_min_core",
    "run_core_test",
    "train_logistic",
    "train_mlp",
    "__version__",
]
