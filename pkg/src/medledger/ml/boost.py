"""Gradient-boosted depth-2 trees on logistic loss, with mean-thresholded
feature-importance selection.

Training runs in two phases: a probe ensemble over all features measures
per-feature importance (total squared-error reduction credited to the
split feature, normalized to sum 1); features at or above the mean
importance are kept and the final ensemble is refit on that subset.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .trees import EmptyDataset, TreeNode, grow_regression_tree, predict_tree, tree_leaf_assignments

_PRIOR_CLIP = 1e-6


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -60, 60)))


@dataclass(frozen=True)
class BoostEnsemble:
    """One binary booster: base score plus shrunken tree increments."""

    base_score: float
    trees: tuple[TreeNode, ...]
    learning_rate: float

    def raw_scores(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        scores = np.full(len(X), self.base_score)
        for tree in self.trees:
            scores += self.learning_rate * predict_tree(tree, X)
        return scores

    def probabilities(self, X: np.ndarray) -> np.ndarray:
        return _sigmoid(self.raw_scores(X))


@dataclass(frozen=True)
class BoostModel:
    """Feature-selected booster: ensembles operate on the reduced columns."""

    selected: tuple[int, ...]
    ensemble: BoostEnsemble
    importance: tuple[float, ...]  # phase-1 FI over the full feature set


def fit_ensemble(
    X: np.ndarray,
    y01: np.ndarray,
    rounds: int,
    learning_rate: float,
    max_depth: int = 2,
    importance_out: np.ndarray | None = None,
) -> BoostEnsemble:
    """Boost depth-``max_depth`` regression trees on logistic loss."""
    X = np.asarray(X, dtype=np.float64)
    y01 = np.asarray(y01, dtype=np.float64)
    if len(y01) == 0:
        raise EmptyDataset("no training rows")
    prior = float(np.clip(y01.mean(), _PRIOR_CLIP, 1 - _PRIOR_CLIP))
    base = float(np.log(prior / (1.0 - prior)))
    scores = np.full(len(y01), base)
    trees: list[TreeNode] = []
    for _ in range(rounds):
        p = _sigmoid(scores)
        gradient = y01 - p
        tree = grow_regression_tree(X, gradient, max_depth, importance_out=importance_out)
        # Newton leaf values: sum(residual) / sum(p(1-p)) over the leaf
        leaves, assignment = tree_leaf_assignments(tree, X)
        hessian = p * (1.0 - p)
        for i, leaf in enumerate(leaves):
            mask = assignment == i
            denom = float(hessian[mask].sum()) + 1e-12
            leaf.value = float(gradient[mask].sum()) / denom
            scores[mask] += learning_rate * leaf.value
        trees.append(tree)
    return BoostEnsemble(base_score=base, trees=tuple(trees), learning_rate=learning_rate)


def normalized_importance(raw: np.ndarray) -> np.ndarray:
    total = float(raw.sum())
    if total <= 0.0:
        return np.zeros_like(raw)
    return raw / total


def select_by_importance(fi: np.ndarray) -> list[int]:
    """Indices with FI at or above the mean FI (inclusive threshold)."""
    fi = np.asarray(fi, dtype=np.float64)
    threshold = float(fi.mean())
    return [i for i in range(len(fi)) if fi[i] >= threshold]


def boost_train(
    X: np.ndarray,
    y01: np.ndarray,
    rounds: int = 100,
    learning_rate: float = 0.1,
    max_depth: int = 2,
) -> BoostModel:
    """Two-phase training: measure importance, select, refit on the subset."""
    X = np.asarray(X, dtype=np.float64)
    raw_importance = np.zeros(X.shape[1])
    fit_ensemble(X, y01, rounds, learning_rate, max_depth, importance_out=raw_importance)
    fi = normalized_importance(raw_importance)
    selected = select_by_importance(fi)
    final = fit_ensemble(X[:, selected], y01, rounds, learning_rate, max_depth)
    return BoostModel(selected=tuple(selected), ensemble=final, importance=tuple(fi.tolist()))


def boost_scores(model: BoostModel, X: np.ndarray) -> np.ndarray:
    """Class-1 probabilities for full-width queries (remapped internally)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    return model.ensemble.probabilities(X[:, model.selected])
