"""Dataset loading and the deterministic synthetic generators.

CSV contract: header row names must match the schema's feature names
(case-insensitive, whitespace/underscore-insensitive, a few public-dataset
aliases); the last column is the target; missing values are empty cells or
"?". Real downloads with these schemas drop straight in, and the shipped
generators produce learnable stand-ins with the same shapes so everything
runs offline.
"""

from __future__ import annotations

import csv
import logging
import math
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .preprocess import parse_cell
from .schemas import DatasetSchema, SchemaMismatch, get_schema, normalize_name

log = logging.getLogger(__name__)


@dataclass
class Dataset:
    schema: DatasetSchema
    X: np.ndarray  # raw floats, NaN = missing
    y: list[str]
    provenance: str = ""

    def __len__(self) -> int:
        return len(self.y)

    def class_counts(self) -> dict[str, int]:
        return {c: self.y.count(c) for c in self.schema.target_classes}

    def majority_baseline(self) -> float:
        counts = self.class_counts()
        return max(counts.values()) / len(self.y)


def load_csv(path: Path, schema: DatasetSchema) -> Dataset:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaMismatch(f"{path}: empty file")
    header, *body = rows
    if len(header) < len(schema.features) + 1:
        raise SchemaMismatch(
            f"{path}: {len(header)} columns, need {len(schema.features)} features + target"
        )
    drop_norm = {normalize_name(c) for c in schema.drop_columns}
    col_for_feature: dict[str, int] = {}
    for idx, name in enumerate(header[:-1]):
        norm = normalize_name(name)
        if norm in drop_norm:
            log.info("%s: column %r is a row identifier, excluded from features", path, name)
            continue
        from .schemas import resolve_header

        canonical = resolve_header(schema, name)
        if canonical is not None and canonical not in col_for_feature:
            col_for_feature[canonical] = idx
    for f in schema.features:
        if f.name not in col_for_feature:
            raise SchemaMismatch(f"{path}: header is missing feature column {f.name!r}")

    X = np.empty((len(body), len(schema.features)))
    y: list[str] = []
    for i, row in enumerate(body):
        for j, spec in enumerate(schema.features):
            X[i, j] = parse_cell(spec, row[col_for_feature[spec.name]])
        raw_label = row[-1].strip()
        label = schema.target_aliases.get(raw_label.lower(), raw_label)
        if label not in schema.target_classes:
            raise SchemaMismatch(f"{path} row {i + 2}: unknown target label {raw_label!r}")
        y.append(label)
    return Dataset(schema=schema, X=X, y=y, provenance=str(path))


def write_csv(path: Path, dataset: Dataset) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([*dataset.schema.feature_names, "target"])
        for row, label in zip(dataset.X, dataset.y):
            cells = ["" if math.isnan(v) else f"{v:.6g}" for v in row]
            writer.writerow([*cells, label])


# -- synthetic stand-ins -------------------------------------------------------
#
# Per class, numeric features draw from class-shifted normals and 0/1-coded
# features from class-dependent Bernoullis, so every schema carries real
# signal for the classifiers to find. A sprinkle of missing cells and gross
# outliers exercises imputation and clipping.


def _signal_profile(schema: DatasetSchema, rng: np.random.Generator):
    d = len(schema.features)
    k = len(schema.target_classes)
    base = rng.uniform(10, 60, size=d)
    spread = rng.uniform(2, 8, size=d)
    shift = rng.normal(0.0, 1.0, size=d)  # direction along which classes separate
    centers = [base + spread * shift * (c - (k - 1) / 2) * 1.6 for c in range(k)]
    return centers, spread


def synth_dataset(
    disease: str,
    n: int = 300,
    seed: int = 7,
    missing_rate: float = 0.02,
    outlier_rate: float = 0.01,
) -> Dataset:
    schema = get_schema(disease)
    # the class-signal profile is fixed per disease; only the draws vary
    # with the seed, so different seeds sample one distribution
    profile_rng = np.random.default_rng(zlib.crc32(schema.disease.encode()))
    centers, spread = _signal_profile(schema, profile_rng)
    rng = np.random.default_rng(seed)
    k = len(schema.target_classes)
    labels = rng.integers(0, k, size=n)
    X = np.empty((n, len(schema.features)))
    for i in range(n):
        X[i] = rng.normal(centers[labels[i]], spread)
    for j, spec in enumerate(schema.features):
        if spec.is_categorical or spec.name in (
            "anaemia", "diabetes", "high_blood_pressure", "sex", "smoking",
        ):
            # 0/1 coding with class-dependent probability
            p = np.clip(0.25 + 0.5 * labels / max(k - 1, 1), 0.05, 0.95)
            X[:, j] = (rng.random(n) < p).astype(float)
    mask = rng.random(X.shape) < missing_rate
    X[mask] = np.nan
    outliers = rng.random(X.shape) < outlier_rate
    X[outliers] = X[outliers] * 40.0 + 1000.0
    y = [schema.target_classes[c] for c in labels]
    return Dataset(schema=schema, X=X, y=y, provenance=f"synthetic(seed={seed}, n={n})")
