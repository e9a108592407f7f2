"""Tabular dataset ingestion, normalization and feature partitioning.

CSV files are parsed with one-hot encoding for non-numeric columns, then
normalized so every feature lies in [-1, 1]. Normalization statistics come
from the training split only; test values outside the training range are
clipped back into the box.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CellParseError, DataError, MissingColumnError


@dataclass(frozen=True, eq=False)
class Dataset:
    """A feature matrix with integer class labels.

    features: (n, d) float array, rows are samples.
    labels: (n,) int array with values in [0, num_classes).
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: list[str]
    num_classes: int

    def __post_init__(self):
        if self.features.ndim != 2:
            raise DataError("features must be a 2-d matrix")
        if len(self.feature_names) != self.features.shape[1]:
            raise DataError("feature_names length must equal feature count")
        if self.num_classes < 2:
            raise DataError("num_classes must be at least 2")
        if len(self.labels) != self.features.shape[0]:
            raise DataError("labels length must equal row count")
        if len(self.labels) and (self.labels.min() < 0 or self.labels.max() >= self.num_classes):
            raise DataError("labels must lie in [0, num_classes)")

    @property
    def num_rows(self) -> int:
        return self.features.shape[0]

    @property
    def num_features(self) -> int:
        return self.features.shape[1]

    def is_normalized(self, tol: float = 1e-9) -> bool:
        if self.num_rows == 0:
            return True
        return bool(np.all(np.abs(self.features) <= 1.0 + tol))


@dataclass(frozen=True)
class FeaturePartition:
    """Disjoint public/sensitive index sets covering all feature columns."""

    public_idx: tuple[int, ...]
    sensitive_idx: tuple[int, ...]

    def __post_init__(self):
        pub, sen = set(self.public_idx), set(self.sensitive_idx)
        if len(pub) != len(self.public_idx) or len(sen) != len(self.sensitive_idx):
            raise ValueError("partition index sets must not contain duplicates")
        if pub & sen:
            raise ValueError("public and sensitive index sets overlap")
        if sorted(self.public_idx) != list(self.public_idx) or sorted(self.sensitive_idx) != list(self.sensitive_idx):
            raise ValueError("partition index sets must be sorted ascending")
        all_idx = pub | sen
        if all_idx and all_idx != set(range(len(all_idx))):
            raise ValueError("partition must cover feature indices 0..d-1 exactly")

    @property
    def num_features(self) -> int:
        return len(self.public_idx) + len(self.sensitive_idx)


@dataclass(frozen=True)
class NormalizationSpec:
    """Per-feature (min, max) pairs from the training split.

    Maps min -> -1 and max -> +1 linearly; constant columns map to 0.
    """

    feature_names: tuple[str, ...]
    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self):
        if np.any(self.mins > self.maxs):
            raise DataError("normalizer min exceeds max for some column")

    def transform_value(self, column: int, raw: float) -> tuple[float, bool]:
        """Normalize a single raw value. Returns (value, clipped_flag)."""
        lo, hi = self.mins[column], self.maxs[column]
        if hi == lo:
            return 0.0, False
        z = 2.0 * (raw - lo) / (hi - lo) - 1.0
        clipped = bool(z < -1.0 or z > 1.0)
        return float(np.clip(z, -1.0, 1.0)), clipped

    def to_json(self) -> str:
        doc = {name: [float(lo), float(hi)] for name, lo, hi in zip(self.feature_names, self.mins, self.maxs)}
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "NormalizationSpec":
        doc = json.loads(text)
        names = tuple(doc.keys())
        mins = np.array([doc[n][0] for n in names], dtype=float)
        maxs = np.array([doc[n][1] for n in names], dtype=float)
        return cls(names, mins, maxs)


def _is_float(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False


def load_csv(path: str | Path, label_column: str) -> Dataset:
    """Parse a CSV with a header row into a raw (unnormalized) Dataset.

    Columns whose cells all parse as numbers are taken as numeric features;
    any other column is one-hot encoded, producing one {0,1} column per
    category named ``column=value``. Labels are mapped onto contiguous ids
    in value order. Empty cells are rejected, not imputed.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"dataset file not found: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        rows = [[cell.strip() for cell in row] for row in reader if row]
    if not rows:
        raise DataError(f"{path}: no data rows")
    return dataset_from_rows(header, rows, label_column)


def dataset_from_rows(header: list[str], rows: list[list[str]], label_column: str) -> Dataset:
    """Build a raw Dataset from header + string rows (the CSV parsing core)."""
    if label_column not in header:
        raise MissingColumnError(label_column)
    label_pos = header.index(label_column)
    for i, row in enumerate(rows, start=1):
        if len(row) != len(header):
            raise CellParseError(i, header[min(len(row), len(header) - 1)], "wrong number of cells")
        for name, cell in zip(header, row):
            if cell == "":
                raise CellParseError(i, name)

    feature_cols = [(pos, name) for pos, name in enumerate(header) if pos != label_pos]
    blocks: list[np.ndarray] = []
    names: list[str] = []
    for pos, name in feature_cols:
        raw = [row[pos] for row in rows]
        if all(_is_float(cell) for cell in raw):
            blocks.append(np.array([float(c) for c in raw], dtype=float)[:, None])
            names.append(name)
        else:
            categories = sorted(set(raw))
            onehot = np.zeros((len(raw), len(categories)))
            index = {cat: k for k, cat in enumerate(categories)}
            for i, cell in enumerate(raw):
                onehot[i, index[cell]] = 1.0
            blocks.append(onehot)
            names.extend(f"{name}={cat}" for cat in categories)

    raw_labels = [row[label_pos] for row in rows]
    if all(_is_float(cell) for cell in raw_labels):
        distinct = sorted(set(raw_labels), key=float)
    else:
        distinct = sorted(set(raw_labels))
    label_ids = {lab: k for k, lab in enumerate(distinct)}
    labels = np.array([label_ids[lab] for lab in raw_labels], dtype=int)

    features = np.hstack(blocks) if blocks else np.zeros((len(rows), 0))
    return Dataset(features, labels, names, num_classes=max(2, len(distinct)))


def fit_normalizer(train: Dataset) -> NormalizationSpec:
    """Compute per-column (min, max) from the training split."""
    if train.num_rows == 0:
        raise DataError("cannot fit a normalizer on an empty dataset")
    return NormalizationSpec(
        tuple(train.feature_names),
        train.features.min(axis=0).astype(float),
        train.features.max(axis=0).astype(float),
    )


def apply_normalizer(spec: NormalizationSpec, data: Dataset) -> Dataset:
    """Map values into [-1, 1] under the training ranges, clipping overshoot."""
    if data.num_features != len(spec.feature_names):
        raise DataError(
            f"column count mismatch: normalizer has {len(spec.feature_names)}, data has {data.num_features}"
        )
    span = spec.maxs - spec.mins
    safe = np.where(span == 0, 1.0, span)
    scaled = 2.0 * (data.features - spec.mins) / safe - 1.0
    scaled = np.where(span == 0, 0.0, scaled)
    scaled = np.clip(scaled, -1.0, 1.0)
    return Dataset(scaled, data.labels, list(data.feature_names), data.num_classes)


def split(data: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Deterministic row-disjoint split with floor(n * fraction) training rows."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    rng = np.random.default_rng(seed)
    order = rng.permutation(data.num_rows)
    cut = int(np.floor(data.num_rows * train_fraction))
    take = lambda idx: Dataset(
        data.features[idx], data.labels[idx], list(data.feature_names), data.num_classes
    )
    return take(order[:cut]), take(order[cut:])


def sample_partition(num_features: int, num_sensitive: int, seed: int) -> FeaturePartition:
    """Draw a uniformly random size-num_sensitive sensitive set; rest is public."""
    if not 0 <= num_sensitive <= num_features:
        raise ValueError("num_sensitive must lie in [0, num_features]")
    rng = np.random.default_rng(seed)
    sensitive = np.sort(rng.choice(num_features, size=num_sensitive, replace=False))
    public = np.setdiff1d(np.arange(num_features), sensitive)
    return FeaturePartition(tuple(int(i) for i in public), tuple(int(i) for i in sensitive))
