"""Experiment harness: repeated random sensitive-feature draws, selector and
delta sweeps, accuracy and data-leakage metrics, baselines, and
machine-readable results.

A cell is one (dataset, model, |S|, delta, selector) combination; selectors
include the three engine variants plus two baselines: "all_features" (the
plain classifier, leakage 1 by definition) and "optimal" (brute-force
minimum core set, a leakage lower bound that needs every sensitive value).

Results serialize deterministically: wall-clock timings are kept out of
results.json/results.csv and written to a separate timings file.
"""

from __future__ import annotations

import csv
import io
import json
import time
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .coreset import optimal_min_core
from .data import Dataset, apply_normalizer, fit_normalizer, sample_partition, split
from .datasets import load_dataset
from .engine import SELECTORS, Engine, EngineConfig, Session, derived_rng
from .gaussian import GaussianStats, estimate
from .models import LinearModel, TrainConfig, hard_predict, train_logistic, train_mlp

OPTIMAL_BUDGET = 12

_P_PARTITION, _P_ENGINE, _P_OPTIMAL = 11, 12, 13


def data_leakage(sessions: list[Session], num_sensitive: int) -> float:
    """Mean fraction of sensitive features the sessions had to reveal."""
    if num_sensitive <= 0:
        raise ValueError("num_sensitive must be positive")
    if not sessions:
        raise ValueError("no sessions given")
    _require_terminal(sessions)
    return float(np.mean([len(s.revealed) / num_sensitive for s in sessions]))


def accuracy(sessions: list[Session], ground_truth) -> float:
    """Fraction of sessions whose representative label matches the truth."""
    ground_truth = np.asarray(ground_truth)
    if not sessions:
        raise ValueError("no sessions given")
    if len(sessions) != len(ground_truth):
        raise ValueError("sessions and ground_truth lengths differ")
    _require_terminal(sessions)
    hits = sum(int(s.terminal.label == y) for s, y in zip(sessions, ground_truth))
    return hits / len(sessions)


def histogram_core_sizes(sessions: list[Session]) -> dict[int, int]:
    """Exact counts of revealed-set sizes across sessions."""
    _require_terminal(sessions)
    return dict(sorted(Counter(len(s.revealed) for s in sessions).items()))


def _require_terminal(sessions):
    for s in sessions:
        if s.terminal is None:
            raise ValueError("all sessions must be terminal")


@dataclass(frozen=True)
class ExperimentSpec:
    dataset: str
    model: str = "logistic"
    sensitive_sizes: tuple[int, ...] = (5,)
    deltas: tuple[float, ...] = (0.0,)
    selectors: tuple[str, ...] = ("fscore",)
    repetitions: int = 100
    seed: int = 0
    train_fraction: float = 0.7
    label_column: str | None = None
    test_cap: int | None = 500
    include_optimal: bool = False
    mc_samples: int = 100
    probe_samples: int = 100_000
    ridge: float = 1e-6
    epochs: int | None = None
    lr: float | None = None
    batch_size: int | None = None

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        if self.model not in ("logistic", "mlp"):
            raise ValueError("model must be 'logistic' or 'mlp'")
        for d in self.deltas:
            if not 0.0 <= d < 0.5:
                raise ValueError("every delta must lie in [0, 0.5)")
        for s in self.selectors:
            if s not in SELECTORS:
                raise ValueError(f"unknown selector {s!r}")
        if self.include_optimal and max(self.sensitive_sizes) > OPTIMAL_BUDGET:
            raise ValueError(
                f"optimal baseline requested with |S| > {OPTIMAL_BUDGET}; "
                "the exhaustive search budget guard refuses this spec"
            )

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentSpec":
        doc = dict(doc)
        for key in ("sensitive_sizes", "deltas", "selectors"):
            if key in doc:
                doc[key] = tuple(doc[key])
        return cls(**doc)

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentSpec":
        path = Path(path)
        if path.suffix.lower() == ".toml":
            import tomli

            doc = tomli.loads(path.read_text())
        else:
            doc = json.loads(path.read_text())
        return cls.from_dict(doc)

    def to_dict(self) -> dict:
        doc = asdict(self)
        for key in ("sensitive_sizes", "deltas", "selectors"):
            doc[key] = list(doc[key])
        return doc


@dataclass
class CellResult:
    dataset: str
    model: str
    sensitive_size: int
    delta: float
    selector: str
    repetitions: int
    mean_accuracy: float
    mean_leakage: float
    accuracy_se: float
    leakage_se: float
    histogram: dict[int, int]
    wall_time: float = field(compare=False)

    def key(self) -> tuple:
        return (self.dataset, self.model, self.sensitive_size, self.delta, self.selector)

    def to_dict(self) -> dict:
        # wall_time deliberately omitted: serialized results must be
        # byte-identical across reruns of the same spec
        return {
            "dataset": self.dataset,
            "model": self.model,
            "sensitive_size": self.sensitive_size,
            "delta": self.delta,
            "selector": self.selector,
            "repetitions": self.repetitions,
            "mean_accuracy": self.mean_accuracy,
            "mean_leakage": self.mean_leakage,
            "accuracy_se": self.accuracy_se,
            "leakage_se": self.leakage_se,
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
        }


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    cells: list[CellResult]

    def to_json(self) -> str:
        return json.dumps(
            {"spec": self.spec.to_dict(), "cells": [c.to_dict() for c in sorted(self.cells, key=CellResult.key)]},
            indent=2,
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(
            ["dataset", "model", "sensitive_size", "delta", "selector",
             "repetitions", "mean_accuracy", "mean_leakage", "accuracy_se", "leakage_se"]
        )
        for c in sorted(self.cells, key=CellResult.key):
            writer.writerow(
                [c.dataset, c.model, c.sensitive_size, repr(c.delta), c.selector,
                 c.repetitions, repr(c.mean_accuracy), repr(c.mean_leakage),
                 repr(c.accuracy_se), repr(c.leakage_se)]
            )
        return buf.getvalue()

    def histograms_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["dataset", "model", "sensitive_size", "delta", "selector", "core_size", "count"])
        for c in sorted(self.cells, key=CellResult.key):
            for size, count in sorted(c.histogram.items()):
                writer.writerow([c.dataset, c.model, c.sensitive_size, repr(c.delta), c.selector, size, count])
        return buf.getvalue()

    def write(self, outdir: str | Path) -> None:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "results.json").write_text(self.to_json())
        (outdir / "results.csv").write_text(self.to_csv())
        (outdir / "histograms.csv").write_text(self.histograms_csv())
        timings = {
            "|".join(map(str, c.key())): round(c.wall_time, 3)
            for c in sorted(self.cells, key=CellResult.key)
        }
        (outdir / "timings.json").write_text(json.dumps(timings, indent=2))


def _train_model(train: Dataset, spec: ExperimentSpec):
    overrides = {k: v for k, v in (("lr", spec.lr), ("epochs", spec.epochs), ("batch_size", spec.batch_size)) if v is not None}
    if spec.model == "logistic":
        return train_logistic(train, TrainConfig.logistic(seed=spec.seed, **overrides))
    return train_mlp(train, TrainConfig.mlp(seed=spec.seed, **overrides))


def importance_weights(train: Dataset, seed: int = 0, reuse: LinearModel | None = None) -> np.ndarray:
    """Per-feature importance: weight magnitude of a logistic fit on all features."""
    model = reuse if reuse is not None else train_logistic(train, TrainConfig.logistic(seed=seed))
    theta = model.theta
    return np.abs(theta) if theta.ndim == 1 else np.linalg.norm(theta, axis=0)


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Run the full protocol sweep a given experiment spec describes, deterministically."""
    raw = load_dataset(spec.dataset, spec.label_column)
    train_raw, test_raw = split(raw, spec.train_fraction, spec.seed)
    normalizer = fit_normalizer(train_raw)
    train = apply_normalizer(normalizer, train_raw)
    test = apply_normalizer(normalizer, test_raw)
    if spec.test_cap is not None and test.num_rows > spec.test_cap:
        test = Dataset(
            test.features[: spec.test_cap], test.labels[: spec.test_cap],
            list(test.feature_names), test.num_classes,
        )

    model = _train_model(train, spec)
    stats = estimate(train, spec.ridge)
    importance = importance_weights(train, spec.seed, reuse=model if isinstance(model, LinearModel) else None)
    base_accuracy = float(np.mean(hard_predict(model, test.features) == test.labels))
    shared_cache: dict = {}

    # accumulators[key] -> (accuracies per rep, leakages per rep, histogram, seconds)
    accumulators: dict[tuple, list] = {}

    def cell(size: int, delta: float, selector: str) -> list:
        key = (size, delta, selector)
        return accumulators.setdefault(key, [[], [], Counter(), 0.0])

    for rep in range(spec.repetitions):
        for size in spec.sensitive_sizes:
            part_seed = int(derived_rng(spec.seed, _P_PARTITION, size, rep).integers(2**63))
            partition = sample_partition(train.num_features, size, part_seed)
            for delta_i, delta in enumerate(spec.deltas):
                for sel_i, selector in enumerate(spec.selectors):
                    started = time.perf_counter()
                    sessions = []
                    for row_i in range(test.num_rows):
                        eng_seed = int(
                            derived_rng(spec.seed, _P_ENGINE, size, rep, delta_i, sel_i, row_i).integers(2**31)
                        )
                        engine = Engine(
                            model, stats, partition,
                            EngineConfig(
                                delta=delta, selector=selector,
                                mc_samples=spec.mc_samples, probe_samples=spec.probe_samples,
                                seed=eng_seed, importance=importance,
                            ),
                        )
                        session, _ = engine.run_auto(test.features[row_i], cache=shared_cache)
                        sessions.append(session)
                    acc = accuracy(sessions, test.labels)
                    leak = data_leakage(sessions, size) if size > 0 else 0.0
                    bucket = cell(size, delta, selector)
                    bucket[0].append(acc)
                    bucket[1].append(leak)
                    bucket[2].update(histogram_core_sizes(sessions))
                    bucket[3] += time.perf_counter() - started

                # baselines once per (size, delta)
                started = time.perf_counter()
                bucket = cell(size, delta, "all_features")
                bucket[0].append(base_accuracy)
                bucket[1].append(1.0)
                bucket[2].update({size: test.num_rows})
                bucket[3] += time.perf_counter() - started

                if spec.include_optimal:
                    started = time.perf_counter()
                    sizes, hits = [], 0
                    for row_i in range(test.num_rows):
                        opt_seed = int(
                            derived_rng(spec.seed, _P_OPTIMAL, size, rep, delta_i, row_i).integers(2**31)
                        )
                        subset, label = optimal_min_core(
                            model, stats, partition, test.features[row_i], delta,
                            probe_samples=spec.probe_samples, law_samples=spec.probe_samples, seed=opt_seed,
                        )
                        sizes.append(len(subset))
                        hits += int(label == test.labels[row_i])
                    bucket = cell(size, delta, "optimal")
                    bucket[0].append(hits / test.num_rows)
                    bucket[1].append(float(np.mean(sizes)) / size if size > 0 else 0.0)
                    bucket[2].update(Counter(sizes))
                    bucket[3] += time.perf_counter() - started

    cells = []
    for (size, delta, selector), (accs, leaks, hist, seconds) in accumulators.items():
        accs, leaks = np.asarray(accs), np.asarray(leaks)
        sem = lambda v: float(v.std(ddof=1) / np.sqrt(len(v))) if len(v) > 1 else 0.0
        cells.append(
            CellResult(
                dataset=spec.dataset, model=spec.model, sensitive_size=size,
                delta=delta, selector=selector, repetitions=spec.repetitions,
                mean_accuracy=float(accs.mean()), mean_leakage=float(leaks.mean()),
                accuracy_se=sem(accs), leakage_se=sem(leaks),
                histogram=dict(sorted(hist.items())), wall_time=seconds,
            )
        )
    return ExperimentResult(spec, cells)
