"""K-nearest-neighbour classification by Euclidean distance.

Tie rules are part of the contract: equal distances rank by lower training
row index (stable sort), and a tied vote goes to the class of the nearest
neighbour among the tied classes.
"""

from __future__ import annotations

import numpy as np


class KTooLarge(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


def knn_classify(
    train_X: np.ndarray, train_y: np.ndarray, k: int, query: np.ndarray
) -> int:
    """Majority label (as class index) among the k nearest training rows."""
    train_X = np.asarray(train_X, dtype=np.float64)
    query = np.asarray(query, dtype=np.float64)
    if query.shape != (train_X.shape[1],):
        raise DimensionMismatch(f"query has shape {query.shape}, want ({train_X.shape[1]},)")
    if k < 1 or k > len(train_X):
        raise KTooLarge(f"k={k} with {len(train_X)} training rows")
    dists = np.sqrt(((train_X - query) ** 2).sum(axis=1))
    order = np.argsort(dists, kind="stable")[:k]  # stable: distance ties keep row order
    neighbour_classes = train_y[order]
    counts = np.bincount(neighbour_classes)
    top = counts.max()
    tied = set(np.nonzero(counts == top)[0])
    if len(tied) == 1:
        return int(next(iter(tied)))
    for c in neighbour_classes:  # vote tie: nearest neighbour among tied classes
        if int(c) in tied:
            return int(c)
    raise AssertionError("unreachable: some neighbour must belong to a tied class")


def knn_scores(train_X: np.ndarray, train_y: np.ndarray, k: int, query: np.ndarray,
               n_classes: int) -> np.ndarray:
    """Vote fractions per class for the k nearest neighbours."""
    dists = np.sqrt(((np.asarray(train_X) - np.asarray(query)) ** 2).sum(axis=1))
    order = np.argsort(dists, kind="stable")[:k]
    counts = np.bincount(train_y[order], minlength=n_classes)
    return counts / k
