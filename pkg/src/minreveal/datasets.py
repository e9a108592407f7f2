"""Bundled example datasets, generated deterministically.

Three tables cover the shapes the rest of the package cares about: a purely
numeric table with a known linear labeling rule, a credit-default style
table, and a bank-marketing style table (both with categorical columns that
exercise the one-hot path and a mildly nonlinear labeling rule that gives
the MLP something to learn). Each generator can also write its table to a
CSV file so the CLI and external tools see ordinary files.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .data import Dataset, dataset_from_rows, load_csv

LABEL_COLUMNS = {"synthetic_linear": "y", "credit_like": "default", "bank_like": "subscribed"}


def _rows_synthetic_linear(n: int, num_features: int, seed: int):
    rng = np.random.default_rng(seed)
    corr = 0.3 ** np.abs(np.subtract.outer(np.arange(num_features), np.arange(num_features)))
    latent = rng.multivariate_normal(np.zeros(num_features), corr, size=n)
    weights = rng.normal(0.0, 1.0, size=num_features)
    threshold = float(np.median(latent @ weights))
    labels = (latent @ weights >= threshold).astype(int)
    scale = rng.uniform(0.5, 20.0, size=num_features)
    offset = rng.uniform(-5.0, 5.0, size=num_features)
    raw = latent * scale + offset
    header = [f"x{k}" for k in range(num_features)] + ["y"]
    rows = [[f"{v:.6f}" for v in raw[i]] + [str(labels[i])] for i in range(n)]
    return header, rows


def _rows_credit_like(n: int, seed: int):
    rng = np.random.default_rng(seed)
    limit = np.round(np.exp(rng.normal(9.5, 0.8, n))).astype(int)
    age = rng.integers(21, 70, n)
    education = rng.choice(["graduate", "university", "highschool", "other"], n, p=[0.35, 0.4, 0.2, 0.05])
    marriage = rng.choice(["married", "single", "other"], n, p=[0.45, 0.5, 0.05])
    delay = np.clip(rng.normal(0.0, 1.2, (n, 3)).cumsum(axis=1), -1, 4).round().astype(int)
    bill_ratio = np.clip(rng.beta(2, 5, n) + 0.05 * delay[:, 2], 0, 1.5)
    pay_ratio = np.clip(rng.beta(2, 2, n) - 0.08 * delay[:, 2], 0, 1)
    edu_shift = np.select([education == "graduate", education == "university"], [-0.3, -0.1], 0.2)
    risk = (
        0.9 * delay.mean(axis=1)
        + 1.6 * bill_ratio
        - 1.8 * pay_ratio
        + edu_shift
        - 0.3 * (np.log(limit) - 9.5)
        + 0.5 * np.maximum(bill_ratio - pay_ratio, 0.0)
        + rng.normal(0.0, 0.6, n)
    )
    labels = (risk >= np.quantile(risk, 0.72)).astype(int)
    header = [
        "limit_bal", "age", "education", "marriage",
        "delay_1", "delay_2", "delay_3", "bill_ratio", "pay_ratio", "default",
    ]
    rows = [
        [
            str(limit[i]), str(age[i]), education[i], marriage[i],
            str(delay[i, 0]), str(delay[i, 1]), str(delay[i, 2]),
            f"{bill_ratio[i]:.4f}", f"{pay_ratio[i]:.4f}", str(labels[i]),
        ]
        for i in range(n)
    ]
    return header, rows


def _rows_bank_like(n: int, seed: int):
    rng = np.random.default_rng(seed)
    age = rng.integers(18, 90, n)
    balance = np.round(rng.normal(1300, 2500, n)).astype(int)
    duration = np.round(np.exp(rng.normal(5.3, 0.9, n))).astype(int)
    campaign = 1 + rng.poisson(1.5, n)
    housing = rng.choice(["yes", "no"], n, p=[0.55, 0.45])
    contact = rng.choice(["cellular", "telephone", "unknown"], n, p=[0.62, 0.08, 0.3])
    score = (
        2.2 * (np.log1p(duration) - 5.3)
        - 0.35 * campaign
        + 0.25 * (balance > 800)
        - 0.6 * (housing == "yes")
        + 0.5 * (contact == "cellular")
        + 0.6 * np.sin(age / 12.0)
        + rng.normal(0.0, 0.9, n)
    )
    labels = np.where(score >= np.quantile(score, 0.65), "yes", "no")
    header = ["age", "balance", "duration", "campaign", "housing", "contact", "subscribed"]
    rows = [
        [str(age[i]), str(balance[i]), str(duration[i]), str(campaign[i]), housing[i], contact[i], labels[i]]
        for i in range(n)
    ]
    return header, rows


_GENERATORS = {
    "synthetic_linear": lambda n, seed: _rows_synthetic_linear(n, 10, seed),
    "credit_like": _rows_credit_like,
    "bank_like": _rows_bank_like,
}

BUNDLED = tuple(sorted(_GENERATORS))
_DEFAULT_SIZES = {"synthetic_linear": 2000, "credit_like": 2000, "bank_like": 2000}
_DEFAULT_SEEDS = {"synthetic_linear": 7, "credit_like": 11, "bank_like": 13}


def generate_csv(name: str, path: str | Path, n: int | None = None, seed: int | None = None) -> Path:
    """Write one bundled table to a CSV file and return its path."""
    header, rows = _GENERATORS[name](n or _DEFAULT_SIZES[name], seed if seed is not None else _DEFAULT_SEEDS[name])
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def load_bundled(name: str, n: int | None = None, seed: int | None = None) -> Dataset:
    """Materialize one bundled table directly as a raw Dataset."""
    if name not in _GENERATORS:
        raise KeyError(f"unknown bundled dataset {name!r}; available: {', '.join(BUNDLED)}")
    header, rows = _GENERATORS[name](n or _DEFAULT_SIZES[name], seed if seed is not None else _DEFAULT_SEEDS[name])
    return dataset_from_rows(header, rows, LABEL_COLUMNS[name])


def load_dataset(source: str, label_column: str | None = None) -> Dataset:
    """Resolve a dataset reference: a bundled name or a CSV file path."""
    if source in _GENERATORS:
        return load_bundled(source)
    if label_column is None:
        raise ValueError(f"{source!r} is not a bundled dataset; loading a CSV needs label_column")
    return load_csv(source, label_column)
