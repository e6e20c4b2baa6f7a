"""Hinge-loss SVM: separable convergence and the margin-residual
support-vector condition."""

import numpy as np
import pytest

from medledger.ml.svm import (
    NoConvergenceWarning,
    NotBinary,
    flag_support_vectors,
    margin_residuals,
    svm_train,
)


def test_one_dimensional_separable():
    X = np.array([[-2.0], [-1.0], [1.0], [2.0]])
    y = np.array([-1.0, -1.0, 1.0, 1.0])
    model = svm_train(X, y)
    predictions = np.where(model.decision(X) >= 0, 1.0, -1.0)
    assert (predictions == y).all()
    assert model.train_accuracy == 1.0


def test_separable_2d_blobs_converge():
    rng = np.random.default_rng(5)
    a = rng.normal((-3, -3), 0.5, size=(25, 2))
    b = rng.normal((3, 3), 0.5, size=(25, 2))
    X = np.vstack([a, b])
    y = np.array([-1.0] * 25 + [1.0] * 25)
    model = svm_train(X, y, epochs=1000)
    assert model.train_accuracy == 1.0


def test_support_vector_condition_flags_only_margin_points():
    # hand-constructed: W=(1,0), b=0; margins: exactly 1 for x=+-1, >1 beyond
    W = np.array([1.0, 0.0])
    b = 0.0
    X = np.array([[1.0, 0.0], [-1.0, 0.0], [3.0, 0.0], [-4.0, 0.0]])
    y = np.array([1.0, -1.0, 1.0, -1.0])
    residuals = margin_residuals(W, b, X, y)
    assert residuals[0] == 0.0 and residuals[1] == 0.0
    assert residuals[2] > 0 and residuals[3] > 0
    flags = flag_support_vectors(W, b, X, y, eps=1e-3)
    assert flags.tolist() == [True, True, False, False]


def test_point_on_margin_is_flagged_after_training():
    X = np.array([[-2.0], [-1.0], [1.0], [2.0]])
    y = np.array([-1.0, -1.0, 1.0, 1.0])
    model = svm_train(X, y)
    # whichever points sit within eps of the margin must be exactly the
    # flagged ones (self-consistency of the stored flags)
    expected = flag_support_vectors(model.W, model.b, X, y)
    assert np.array_equal(model.support, expected)


def test_multiclass_rejected():
    X = np.zeros((3, 2))
    with pytest.raises(NotBinary):
        svm_train(X, np.array([0.0, 1.0, 2.0]))


def test_nonseparable_warns_with_accuracy():
    X = np.array([[0.0], [0.0], [0.1], [0.1]] * 3)
    y = np.array([1.0, -1.0, 1.0, -1.0] * 3)
    with pytest.warns(NoConvergenceWarning):
        model = svm_train(X, y, epochs=20)
    assert 0.0 <= model.train_accuracy < 1.0
