"""Linear SVM trained by hinge-loss subgradient descent.

Per-sample rule: a point with margin residual y(Wx + b) - 1 below zero
pulls the parameters toward itself (hinge gradient plus L2 shrinkage);
any other point only shrinks W. After training, points sitting on the
margin (residual zero within eps) are flagged as support vectors.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

SUPPORT_EPS = 1e-3


class NotBinary(ValueError):
    pass


class NoConvergenceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class LinearBoundary:
    W: np.ndarray
    b: float
    support: np.ndarray  # bool flags per training row
    train_accuracy: float

    def decision(self, X: np.ndarray) -> np.ndarray:
        return np.atleast_2d(X) @ self.W + self.b


def margin_residuals(W: np.ndarray, b: float, X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """y(Wx + b) - 1 per row: 0 on the margin, >0 outside, <0 violating."""
    return y * (X @ W + b) - 1.0


def flag_support_vectors(
    W: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, eps: float = SUPPORT_EPS
) -> np.ndarray:
    return np.abs(margin_residuals(W, b, X, y)) <= eps


def svm_train(
    X: np.ndarray,
    y: np.ndarray,
    epochs: int = 500,
    learning_rate: float = 0.01,
    regularization: float = 0.01,
) -> LinearBoundary:
    """Train on labels +-1; raises NotBinary for anything else.

    Stops early once no sample violates the margin. If the final pass
    still misclassifies points, a NoConvergenceWarning reports the
    training accuracy rather than failing.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    labels = set(np.unique(y).tolist())
    if not labels <= {-1.0, 1.0} or len(labels) < 1:
        raise NotBinary(f"labels must be +-1, got {sorted(labels)}")
    n, d = X.shape
    W = np.zeros(d)
    b = 0.0
    for _ in range(epochs):
        updated = False
        for i in range(n):
            if y[i] * (X[i] @ W + b) - 1.0 < 0:
                W -= learning_rate * (2.0 * regularization * W - y[i] * X[i])
                b += learning_rate * y[i]
                updated = True
            else:
                W -= learning_rate * (2.0 * regularization * W)
        if not updated:
            break
    predictions = np.where(X @ W + b >= 0, 1.0, -1.0)
    accuracy = float((predictions == y).mean())
    if accuracy < 1.0:
        warnings.warn(
            f"svm did not separate the training set: accuracy {accuracy:.3f}",
            NoConvergenceWarning,
            stacklevel=2,
        )
    return LinearBoundary(
        W=W, b=b, support=flag_support_vectors(W, b, X, y), train_accuracy=accuracy
    )
