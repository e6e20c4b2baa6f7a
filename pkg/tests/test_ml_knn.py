"""KNN against an exhaustive brute-force oracle written with plain lists."""

import math
import random

import numpy as np
import pytest

from medledger.ml.knn import DimensionMismatch, KTooLarge, knn_classify


def oracle_knn(train_X, train_y, k, query):
    """Sort-all-distances reference with the same declared tie rules,
    implemented without numpy."""
    rows = []
    for idx, row in enumerate(train_X):
        d = math.sqrt(sum((a - b) ** 2 for a, b in zip(row, query)))
        rows.append((d, idx))
    rows.sort()  # (distance, original index): ties keep lower index first
    top = rows[:k]
    votes = {}
    for d, idx in top:
        votes[train_y[idx]] = votes.get(train_y[idx], 0) + 1
    best = max(votes.values())
    tied = {c for c, v in votes.items() if v == best}
    if len(tied) == 1:
        return tied.pop()
    for d, idx in top:  # nearest neighbour among tied classes
        if train_y[idx] in tied:
            return train_y[idx]
    raise AssertionError


def test_spec_example_nearest():
    X = np.array([[0.0, 0.0], [0.0, 1.0], [5.0, 5.0]])
    y = np.array([0, 0, 1])  # A, A, B
    assert knn_classify(X, y, 1, np.array([0.0, 0.1])) == 0


def test_spec_example_global_majority():
    X = np.array([[0.0, 0.0], [0.0, 1.0], [5.0, 5.0]])
    y = np.array([0, 0, 1])
    for q in ([0.0, 0.0], [5.0, 5.0], [100.0, -3.0]):
        assert knn_classify(X, y, 3, np.array(q)) == 0  # 2:1 majority always


def test_distance_tie_prefers_lower_row_index():
    X = np.array([[1.0, 0.0], [-1.0, 0.0]])  # equidistant from origin
    y = np.array([1, 0])
    assert knn_classify(X, y, 1, np.array([0.0, 0.0])) == 1  # row 0 wins


def test_vote_tie_broken_by_nearest():
    X = np.array([[0.0, 1.0], [0.0, 2.0], [0.0, 3.0], [0.0, 4.0]])
    y = np.array([1, 0, 1, 0])
    # k=4: votes 2:2, nearest neighbour is class 1
    assert knn_classify(X, y, 4, np.array([0.0, 0.0])) == 1


def test_k_too_large_and_dim_mismatch():
    X = np.array([[0.0, 0.0]])
    y = np.array([0])
    with pytest.raises(KTooLarge):
        knn_classify(X, y, 2, np.array([0.0, 0.0]))
    with pytest.raises(DimensionMismatch):
        knn_classify(X, y, 1, np.array([0.0, 0.0, 0.0]))


def test_oracle_equivalence_200_instances():
    rnd = random.Random(1234)
    for trial in range(200):
        n = rnd.randint(3, 50)
        d = rnd.randint(1, 6)
        k = rnd.choice([1, 3, 5])
        if k > n:
            k = 1
        X = [[rnd.uniform(-5, 5) for _ in range(d)] for _ in range(n)]
        y = [rnd.randint(0, 2) for _ in range(n)]
        q = [rnd.uniform(-5, 5) for _ in range(d)]
        got = knn_classify(np.array(X), np.array(y), k, np.array(q))
        want = oracle_knn(X, y, k, q)
        assert got == want, f"trial {trial}: knn={got} oracle={want}"
