"""Random forest: Gini trees on bootstrap samples with sqrt(d) feature
candidates per split, majority vote over trees.

Vote ties break toward the lexicographically smallest class label, which
is why prediction needs the label strings and not just indices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .trees import EmptyDataset, TreeNode, grow_classification_tree


@dataclass(frozen=True)
class Forest:
    trees: tuple[TreeNode, ...]
    n_classes: int


def forest_train(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    n_trees: int = 101,
    max_depth: int = 8,
    seed: int = 0,
) -> Forest:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if len(y) == 0:
        raise EmptyDataset("no training rows")
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    rng = np.random.default_rng(seed)
    n, d = X.shape
    n_candidates = max(1, int(np.sqrt(d)))
    trees = []
    for _ in range(n_trees):
        sample = rng.integers(0, n, size=n)  # bootstrap with replacement
        trees.append(
            grow_classification_tree(
                X[sample], y[sample], n_classes, max_depth, rng=rng, n_candidates=n_candidates
            )
        )
    return Forest(trees=tuple(trees), n_classes=n_classes)


def tree_votes(forest: Forest, x: np.ndarray) -> np.ndarray:
    """Per-class vote counts for one query."""
    votes = np.zeros(forest.n_classes, dtype=np.int64)
    for tree in forest.trees:
        votes[int(tree.predict_one(x))] += 1
    return votes


def forest_predict(forest: Forest, x: np.ndarray, class_labels: tuple[str, ...]) -> int:
    """Majority class index; ties go to the lexicographically smallest label."""
    votes = tree_votes(forest, x)
    top = votes.max()
    tied = [c for c in range(forest.n_classes) if votes[c] == top]
    if len(tied) == 1:
        return tied[0]
    return min(tied, key=lambda c: class_labels[c])
