"""De-identification and preprocessing.

``deidentify`` projects a raw patient record onto the schema's clinical
features and nothing else: identifier fields are never read, so they
cannot leak into a feature vector. ``fit_preprocess`` replaces missing
numerics with the column median and missing categoricals with the column
mode, clips numeric outliers to [Q1 - 1.5 IQR, Q3 + 1.5 IQR] (linear
interpolation quantiles, numpy's default), and records per-feature stats
so the identical transform is applied at inference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .schemas import HEADER_ALIASES, DatasetSchema, FeatureSpec, normalize_name

MIN_ROWS = 10

MISSING_MARKERS = {"", "?", "nan", "na", "none", "null"}


class MissingClinicalField(ValueError):
    def __init__(self, field_name: str):
        super().__init__(f"record is missing clinical field {field_name!r}")
        self.field_name = field_name


class AllMissingColumn(ValueError):
    pass


class TooFewRows(ValueError):
    pass


def parse_cell(spec: FeatureSpec, raw) -> float:
    """One CSV cell or form value to a float; NaN marks a missing value."""
    if raw is None:
        return math.nan
    if isinstance(raw, (int, float)):
        return float(raw) if not (isinstance(raw, float) and math.isnan(raw)) else math.nan
    text = str(raw).strip()
    if text.lower() in MISSING_MARKERS:
        return math.nan
    if spec.categories is not None:
        key = normalize_name(text)
        if key in spec.categories:
            return float(spec.categories[key])
        try:
            return float(text)  # already integer-coded
        except ValueError:
            return math.nan  # unknown category: treat as missing
    try:
        return float(text)
    except ValueError:
        return math.nan


def deidentify(record: dict, schema: DatasetSchema) -> np.ndarray:
    """Project a raw profile-plus-symptoms record onto schema features only.

    The output contains exactly the schema's clinical values, in schema
    order; identifiers present in the record are simply never read.
    """
    lookup = {}
    for k, v in record.items():
        norm = normalize_name(k)
        lookup[HEADER_ALIASES.get(norm, norm)] = v
    values = []
    for spec in schema.features:
        key = normalize_name(spec.name)
        if key not in lookup:
            raise MissingClinicalField(spec.name)
        values.append(parse_cell(spec, lookup[key]))
    return np.array(values, dtype=np.float64)


@dataclass(frozen=True)
class FeatureStats:
    impute: float
    lo: float
    hi: float
    mean: float
    std: float


@dataclass(frozen=True)
class PreprocessStats:
    features: tuple[FeatureStats, ...]

    def transform(self, X: np.ndarray) -> np.ndarray:
        """Impute, clip, and z-score one row or a matrix."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64)).copy()
        if X.shape[1] != len(self.features):
            raise ValueError(f"expected {len(self.features)} features, got {X.shape[1]}")
        for j, st in enumerate(self.features):
            col = X[:, j]
            col[np.isnan(col)] = st.impute
            np.clip(col, st.lo, st.hi, out=col)
            X[:, j] = (col - st.mean) / st.std
        return X


def fit_preprocess(
    X: np.ndarray, specs: tuple[FeatureSpec, ...]
) -> tuple[np.ndarray, PreprocessStats]:
    """Clean a raw training matrix (NaN = missing) and freeze the stats.

    Returns the imputed/clipped matrix (not yet standardized; the stats
    carry mean/std so algorithms standardize identically at train and
    inference time).
    """
    X = np.asarray(X, dtype=np.float64)
    if X.shape[0] < MIN_ROWS:
        raise TooFewRows(f"need at least {MIN_ROWS} rows, got {X.shape[0]}")
    out = X.copy()
    stats = []
    for j, spec in enumerate(specs):
        col = out[:, j]
        present = col[~np.isnan(col)]
        if present.size == 0:
            raise AllMissingColumn(f"feature {spec.name!r} has no observed values")
        if spec.is_categorical:
            codes, counts = np.unique(present, return_counts=True)
            impute = float(codes[np.argmax(counts)])  # unique() sorts: ties take smallest
            lo, hi = -math.inf, math.inf
        else:
            impute = float(np.median(present))
            q1, q3 = np.percentile(present, [25, 75])  # linear interpolation
            iqr = q3 - q1
            lo, hi = float(q1 - 1.5 * iqr), float(q3 + 1.5 * iqr)
        col[np.isnan(col)] = impute
        np.clip(col, lo, hi, out=col)
        mean = float(col.mean()) if not spec.is_categorical else 0.0
        std = float(col.std()) if not spec.is_categorical else 1.0
        if std == 0.0:
            std = 1.0
        stats.append(FeatureStats(impute=impute, lo=lo, hi=hi, mean=mean, std=std))
        out[:, j] = col
    return out, PreprocessStats(features=tuple(stats))
