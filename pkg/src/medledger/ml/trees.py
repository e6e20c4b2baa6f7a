"""CART-style decision trees: Gini classification trees for the forest and
small squared-error regression trees for boosting.

Split search is vectorized: per candidate feature the node's rows are
sorted once and every threshold is scored from prefix sums. Ties go to the
lowest feature index, then the lowest threshold, so training is fully
deterministic for a fixed candidate order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class EmptyDataset(ValueError):
    pass


@dataclass
class TreeNode:
    feature: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    value: float = 0.0  # leaf payload: class index or regression value

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def predict_one(self, x: np.ndarray) -> float:
        node = self
        while not node.is_leaf:
            node = node.left if x[node.feature] <= node.threshold else node.right
        return node.value


def _gini_from_counts(counts: np.ndarray, totals: np.ndarray) -> np.ndarray:
    """Gini impurity for each prefix; counts is (n_splits, n_classes)."""
    with np.errstate(invalid="ignore", divide="ignore"):
        p = counts / totals[:, None]
        return 1.0 - np.nansum(p * p, axis=1)


def _best_gini_split(
    X: np.ndarray, y: np.ndarray, n_classes: int, candidates: np.ndarray
) -> tuple[int, float, float] | None:
    """Best (feature, threshold, impurity_decrease) over candidate features."""
    n = len(y)
    onehot = np.eye(n_classes)[y]
    parent = 1.0 - ((np.bincount(y, minlength=n_classes) / n) ** 2).sum()
    best = None
    for f in candidates:
        vals = X[:, f]
        order = np.argsort(vals, kind="stable")
        sv = vals[order]
        cum = np.cumsum(onehot[order], axis=0)
        # split after position i: left = rows 0..i
        splits = np.nonzero(sv[:-1] < sv[1:])[0]
        if splits.size == 0:
            continue
        n_left = splits + 1.0
        n_right = n - n_left
        g_left = _gini_from_counts(cum[splits], n_left)
        g_right = _gini_from_counts(cum[-1] - cum[splits], n_right)
        weighted = (n_left * g_left + n_right * g_right) / n
        i = int(np.argmin(weighted))
        decrease = parent - float(weighted[i])
        threshold = float((sv[splits[i]] + sv[splits[i] + 1]) / 2.0)
        if decrease > 1e-12 and (best is None or decrease > best[2] + 1e-12):
            best = (int(f), threshold, decrease)
    return best


def grow_classification_tree(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    max_depth: int,
    rng: np.random.Generator | None = None,
    n_candidates: int | None = None,
) -> TreeNode:
    """Gini tree; ``n_candidates`` random features per split when given."""
    if len(y) == 0:
        raise EmptyDataset("cannot grow a tree on zero rows")
    d = X.shape[1]

    def leaf(indices: np.ndarray) -> TreeNode:
        counts = np.bincount(y[indices], minlength=n_classes)
        return TreeNode(value=float(np.argmax(counts)))  # argmax: smallest index wins ties

    def grow(indices: np.ndarray, depth: int) -> TreeNode:
        labels = y[indices]
        if depth >= max_depth or len(indices) < 2 or np.all(labels == labels[0]):
            return leaf(indices)
        if rng is not None and n_candidates is not None and n_candidates < d:
            candidates = np.sort(rng.choice(d, size=n_candidates, replace=False))
        else:
            candidates = np.arange(d)
        found = _best_gini_split(X[indices], labels, n_classes, candidates)
        if found is None:
            return leaf(indices)
        f, threshold, _ = found
        mask = X[indices, f] <= threshold
        return TreeNode(
            feature=f,
            threshold=threshold,
            left=grow(indices[mask], depth + 1),
            right=grow(indices[~mask], depth + 1),
        )

    return grow(np.arange(len(y)), 0)


def grow_regression_tree(
    X: np.ndarray,
    targets: np.ndarray,
    max_depth: int,
    importance_out: np.ndarray | None = None,
) -> TreeNode:
    """Squared-error tree on gradient targets; leaves hold region means
    (boosting replaces them with Newton values afterwards).

    ``importance_out`` accumulates each split's squared-error reduction at
    the split feature's index.
    """
    if len(targets) == 0:
        raise EmptyDataset("cannot grow a tree on zero rows")
    d = X.shape[1]

    def sse(t: np.ndarray) -> float:
        return float(((t - t.mean()) ** 2).sum()) if len(t) else 0.0

    def grow(indices: np.ndarray, depth: int) -> TreeNode:
        t = targets[indices]
        if depth >= max_depth or len(indices) < 2 or np.allclose(t, t[0]):
            return TreeNode(value=float(t.mean()))
        parent_sse = sse(t)
        best = None
        for f in range(d):
            vals = X[indices, f]
            order = np.argsort(vals, kind="stable")
            sv, st = vals[order], t[order]
            splits = np.nonzero(sv[:-1] < sv[1:])[0]
            if splits.size == 0:
                continue
            csum = np.cumsum(st)
            csq = np.cumsum(st * st)
            n_left = splits + 1.0
            n_right = len(t) - n_left
            sum_l = csum[splits]
            sse_l = csq[splits] - sum_l * sum_l / n_left
            sum_r = csum[-1] - sum_l
            sse_r = (csq[-1] - csq[splits]) - sum_r * sum_r / n_right
            total = sse_l + sse_r
            i = int(np.argmin(total))
            reduction = parent_sse - float(total[i])
            threshold = float((sv[splits[i]] + sv[splits[i] + 1]) / 2.0)
            if reduction > 1e-12 and (best is None or reduction > best[2] + 1e-12):
                best = (f, threshold, reduction)
        if best is None:
            return TreeNode(value=float(t.mean()))
        f, threshold, reduction = best
        if importance_out is not None:
            importance_out[f] += reduction
        mask = X[indices, f] <= threshold
        return TreeNode(
            feature=f,
            threshold=threshold,
            left=grow(indices[mask], depth + 1),
            right=grow(indices[~mask], depth + 1),
        )

    return grow(np.arange(len(targets)), 0)


def tree_leaf_assignments(node: TreeNode, X: np.ndarray) -> tuple[list[TreeNode], np.ndarray]:
    """All leaves of the tree plus each row's leaf index (for Newton steps)."""
    leaves: list[TreeNode] = []

    def collect(n: TreeNode):
        if n.is_leaf:
            leaves.append(n)
        else:
            collect(n.left)
            collect(n.right)

    collect(node)
    ids = {id(leaf): i for i, leaf in enumerate(leaves)}

    def locate(x) -> int:
        n = node
        while not n.is_leaf:
            n = n.left if x[n.feature] <= n.threshold else n.right
        return ids[id(n)]

    assignment = np.fromiter((locate(x) for x in X), dtype=np.int64, count=len(X))
    return leaves, assignment


def predict_tree(node: TreeNode, X: np.ndarray) -> np.ndarray:
    return np.fromiter((node.predict_one(x) for x in X), dtype=np.float64, count=len(X))
