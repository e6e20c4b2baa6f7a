"""Training orchestration, prediction dispatch, evaluation, and best-model
selection across the four algorithms.

Multiclass SVM and boosting run one-vs-rest with argmax over per-class
scores (ties to the smallest class index). The forest keeps its own label
tie rule, KNN its nearest-neighbour rule.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import boost as boost_mod
from . import forest as forest_mod
from . import knn as knn_mod
from . import svm as svm_mod
from .datasets import Dataset
from .preprocess import PreprocessStats, fit_preprocess
from .schemas import DatasetSchema, SchemaMismatch

ALGORITHMS = ("knn", "svm", "forest", "boost")

# Tie order for best-model selection: fewer parameters wins.
_SELECTION_TIE_ORDER = {"knn": 0, "svm": 1, "boost": 2, "forest": 3}


class DimensionMismatch(ValueError):
    pass


@dataclass
class TrainConfig:
    knn_k: int = 5
    svm_epochs: int = 500
    svm_learning_rate: float = 0.01
    svm_regularization: float = 0.01
    forest_trees: int = 101
    forest_depth: int = 8
    boost_rounds: int = 100
    boost_learning_rate: float = 0.1
    boost_depth: int = 2
    seed: int = 20230425
    holdout_fraction: float = 0.3


@dataclass
class KnnParams:
    k: int
    train_X: np.ndarray
    train_y: np.ndarray


@dataclass
class SvmParams:
    boundaries: list[tuple[np.ndarray, float]]  # (W, b) per class, one-vs-rest


@dataclass
class ForestParams:
    forest: forest_mod.Forest


@dataclass
class BoostParams:
    selected: tuple[int, ...]
    ensembles: list[boost_mod.BoostEnsemble]  # one for binary, else per class
    importance: tuple[float, ...]
    learning_rate: float


@dataclass
class TrainedModel:
    algorithm: str
    schema: DatasetSchema
    stats: PreprocessStats
    params: KnnParams | SvmParams | ForestParams | BoostParams


@dataclass(frozen=True)
class ConfusionMatrix:
    classes: tuple[str, ...]
    counts: np.ndarray  # rows = truth, cols = predicted

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.counts)) / self.total

    def render(self) -> str:
        width = max(len(c) for c in self.classes) + 2
        lines = [" " * width + "".join(f"{c:>{width}}" for c in self.classes)]
        for i, c in enumerate(self.classes):
            lines.append(f"{c:>{width}}" + "".join(f"{n:>{width}}" for n in self.counts[i]))
        return "\n".join(lines)


def encode_labels(dataset: Dataset) -> np.ndarray:
    return np.array([dataset.schema.class_index(label) for label in dataset.y], dtype=np.int64)


def stratified_split(y: np.ndarray, holdout_fraction: float, seed: int):
    """Per-class shuffled split; returns (train_idx, holdout_idx)."""
    rng = np.random.default_rng(seed)
    train, hold = [], []
    for c in np.unique(y):
        idx = np.nonzero(y == c)[0]
        rng.shuffle(idx)
        n_hold = max(1, int(round(len(idx) * holdout_fraction)))
        hold.extend(idx[:n_hold])
        train.extend(idx[n_hold:])
    return np.sort(np.array(train)), np.sort(np.array(hold))


def train_model(algorithm: str, dataset: Dataset, config: TrainConfig | None = None) -> TrainedModel:
    """Fit one algorithm on the full dataset (preprocessing fitted here too)."""
    config = config or TrainConfig()
    y = encode_labels(dataset)
    cleaned, stats = fit_preprocess(dataset.X, dataset.schema.features)
    X = stats.transform(cleaned)
    return _fit(algorithm, X, y, dataset.schema, stats, config)


def _fit(
    algorithm: str,
    X: np.ndarray,
    y: np.ndarray,
    schema: DatasetSchema,
    stats: PreprocessStats,
    config: TrainConfig,
) -> TrainedModel:
    n_classes = len(schema.target_classes)
    if algorithm == "knn":
        params = KnnParams(k=min(config.knn_k, len(y)), train_X=X, train_y=y)
    elif algorithm == "svm":
        boundaries = []
        for c in range(n_classes):
            labels = np.where(y == c, 1.0, -1.0)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", svm_mod.NoConvergenceWarning)
                boundary = svm_mod.svm_train(
                    X, labels,
                    epochs=config.svm_epochs,
                    learning_rate=config.svm_learning_rate,
                    regularization=config.svm_regularization,
                )
            boundaries.append((boundary.W, boundary.b))
        params = SvmParams(boundaries=boundaries)
    elif algorithm == "forest":
        params = ForestParams(
            forest=forest_mod.forest_train(
                X, y, n_classes,
                n_trees=config.forest_trees, max_depth=config.forest_depth, seed=config.seed,
            )
        )
    elif algorithm == "boost":
        raw_importance = np.zeros(X.shape[1])
        positives = [np.where(y == c, 1.0, 0.0) for c in range(n_classes)]
        probes = positives if n_classes > 2 else positives[1:]
        for y01 in probes:
            boost_mod.fit_ensemble(
                X, y01, config.boost_rounds, config.boost_learning_rate,
                config.boost_depth, importance_out=raw_importance,
            )
        fi = boost_mod.normalized_importance(raw_importance)
        selected = tuple(boost_mod.select_by_importance(fi))
        ensembles = [
            boost_mod.fit_ensemble(
                X[:, selected], y01, config.boost_rounds,
                config.boost_learning_rate, config.boost_depth,
            )
            for y01 in probes
        ]
        params = BoostParams(
            selected=selected, ensembles=ensembles,
            importance=tuple(fi.tolist()), learning_rate=config.boost_learning_rate,
        )
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    return TrainedModel(algorithm=algorithm, schema=schema, stats=stats, params=params)


def predict(model: TrainedModel, query: np.ndarray) -> tuple[str, dict[str, float]]:
    """Label plus per-class scores for one raw (unstandardized) vector."""
    query = np.asarray(query, dtype=np.float64)
    if query.shape != (len(model.schema.features),):
        raise DimensionMismatch(
            f"query has {query.shape[0] if query.ndim == 1 else query.shape} values, "
            f"schema {model.schema.disease} wants {len(model.schema.features)}"
        )
    x = model.stats.transform(query)[0]
    classes = model.schema.target_classes
    p = model.params
    if isinstance(p, KnnParams):
        scores = knn_mod.knn_scores(p.train_X, p.train_y, p.k, x, len(classes))
        label_idx = knn_mod.knn_classify(p.train_X, p.train_y, p.k, x)
    elif isinstance(p, SvmParams):
        scores = np.array([float(x @ W + b) for W, b in p.boundaries])
        label_idx = int(np.argmax(scores))  # argmax takes the smallest tied index
    elif isinstance(p, ForestParams):
        votes = forest_mod.tree_votes(p.forest, x)
        scores = votes / votes.sum()
        label_idx = forest_mod.forest_predict(p.forest, x, classes)
    elif isinstance(p, BoostParams):
        reduced = x[list(p.selected)]
        if len(p.ensembles) == 1:
            prob = float(p.ensembles[0].probabilities(reduced[None, :])[0])
            scores = np.array([1.0 - prob, prob])
        else:
            scores = np.array(
                [float(e.probabilities(reduced[None, :])[0]) for e in p.ensembles]
            )
        label_idx = int(np.argmax(scores))
    else:
        raise TypeError(f"unknown model params {type(p)}")
    return classes[label_idx], {c: float(s) for c, s in zip(classes, scores)}


def evaluate(model: TrainedModel, holdout: Dataset) -> ConfusionMatrix:
    if holdout.schema.feature_names != model.schema.feature_names or (
        holdout.schema.target_classes != model.schema.target_classes
    ):
        raise SchemaMismatch(
            f"holdout schema {holdout.schema.disease} does not match model "
            f"schema {model.schema.disease}"
        )
    k = len(model.schema.target_classes)
    counts = np.zeros((k, k), dtype=np.int64)
    for row, label in zip(holdout.X, holdout.y):
        predicted, _ = predict(model, row)
        counts[model.schema.class_index(label), model.schema.class_index(predicted)] += 1
    return ConfusionMatrix(classes=model.schema.target_classes, counts=counts)


@dataclass
class SelectionReport:
    disease: str
    accuracies: dict[str, float]
    best: str
    baseline: float
    models: dict[str, TrainedModel] = field(repr=False, default_factory=dict)
    confusions: dict[str, ConfusionMatrix] = field(repr=False, default_factory=dict)


def train_and_select(dataset: Dataset, config: TrainConfig | None = None) -> SelectionReport:
    """Train all four on a stratified 70/30 split and pick the best holdout
    accuracy (ties: fewer parameters, KNN < SVM < Boost < Forest)."""
    config = config or TrainConfig()
    y = encode_labels(dataset)
    train_idx, hold_idx = stratified_split(y, config.holdout_fraction, config.seed)
    train = Dataset(
        schema=dataset.schema, X=dataset.X[train_idx],
        y=[dataset.y[i] for i in train_idx], provenance=dataset.provenance,
    )
    holdout = Dataset(
        schema=dataset.schema, X=dataset.X[hold_idx],
        y=[dataset.y[i] for i in hold_idx], provenance=dataset.provenance,
    )
    report = SelectionReport(
        disease=dataset.schema.disease, accuracies={}, best="",
        baseline=holdout.majority_baseline(),
    )
    for algorithm in ALGORITHMS:
        model = train_model(algorithm, train, config)
        cm = evaluate(model, holdout)
        report.models[algorithm] = model
        report.confusions[algorithm] = cm
        report.accuracies[algorithm] = cm.accuracy
    report.best = max(
        ALGORITHMS,
        key=lambda a: (report.accuracies[a], -_SELECTION_TIE_ORDER[a]),
    )
    return report
