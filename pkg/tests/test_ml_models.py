"""Prediction dispatch, evaluation, selection, and dataset plumbing."""

import numpy as np
import pytest

from medledger.ml.datasets import Dataset, load_csv, synth_dataset, write_csv
from medledger.ml.models import (
    ConfusionMatrix,
    TrainConfig,
    evaluate,
    predict,
    train_and_select,
    train_model,
)
from medledger.ml.schemas import DIABETES, MATERNAL_HEALTH, SchemaMismatch, get_schema

FAST = TrainConfig(forest_trees=11, forest_depth=5, boost_rounds=25, svm_epochs=150)


@pytest.fixture(scope="module")
def diabetes():
    return synth_dataset("diabetes", n=160, seed=3)


def test_knn_training_row_predicts_itself(diabetes):
    model = train_model("knn", diabetes, TrainConfig(knn_k=1))
    clean_rows = diabetes.X[~np.isnan(diabetes.X).any(axis=1)]
    labels = [diabetes.y[i] for i in range(len(diabetes))
              if not np.isnan(diabetes.X[i]).any()]
    for i in range(5):
        label, scores = predict(model, clean_rows[i])
        assert label == labels[i]
        assert scores[label] == 1.0


def test_ovr_tie_takes_smallest_class_index():
    scores = np.array([0.2, 0.9, 0.9])
    assert int(np.argmax(scores)) == 1  # documented tie rule rides on argmax


def test_predict_dimension_mismatch(diabetes):
    model = train_model("knn", diabetes, FAST)
    from medledger.ml.models import DimensionMismatch

    with pytest.raises(DimensionMismatch):
        predict(model, np.zeros(3))


def test_evaluate_perfect_predictor(diabetes):
    model = train_model("knn", diabetes, TrainConfig(knn_k=1))
    clean = ~np.isnan(diabetes.X).any(axis=1)
    exact = Dataset(schema=diabetes.schema, X=diabetes.X[clean],
                    y=[diabetes.y[i] for i in np.nonzero(clean)[0]])
    cm = evaluate(model, exact)
    assert cm.counts.sum() == len(exact)
    assert np.all(cm.counts == np.diag(np.diag(cm.counts)))
    assert cm.accuracy == 1.0


def test_confusion_matrix_sums_and_accuracy():
    cm = ConfusionMatrix(classes=("a", "b"), counts=np.array([[5, 5], [5, 5]]))
    assert cm.total == 20
    assert cm.accuracy == 0.5  # a constant predictor on a balanced set


def test_evaluate_schema_mismatch(diabetes):
    model = train_model("knn", diabetes, FAST)
    other = synth_dataset("heart", n=60, seed=1)
    with pytest.raises(SchemaMismatch):
        evaluate(model, other)


def test_confusion_cells_sum_to_holdout_size():
    rng = np.random.default_rng(0)
    for trial in range(6):
        ds = synth_dataset("maternalhealth", n=90 + trial * 10, seed=trial)
        report = train_and_select(ds, FAST)
        for algorithm, cm in report.confusions.items():
            assert cm.total == sum(cm.counts.sum(axis=1))
            holdout_n = cm.total
            assert holdout_n > 0


def test_train_and_select_beats_baseline_on_all_diseases():
    for disease in ("heart", "lungcancer", "maternalhealth", "kidney", "diabetes"):
        ds = synth_dataset(disease, n=150, seed=11)
        report = train_and_select(ds, FAST)
        best_acc = report.accuracies[report.best]
        assert best_acc > report.baseline, (
            f"{disease}: best {report.best}={best_acc:.3f} "
            f"does not beat baseline {report.baseline:.3f}"
        )


def test_selection_tie_order_prefers_fewer_parameters():
    from medledger.ml.models import _SELECTION_TIE_ORDER

    assert sorted(_SELECTION_TIE_ORDER, key=_SELECTION_TIE_ORDER.get) == [
        "knn", "svm", "boost", "forest",
    ]


def test_multiclass_svm_and_boost(diabetes):
    ds = synth_dataset("maternalhealth", n=120, seed=5)
    for algorithm in ("svm", "boost"):
        model = train_model(algorithm, ds, FAST)
        label, scores = predict(model, ds.X[0])
        assert label in MATERNAL_HEALTH.target_classes
        assert set(scores) == set(MATERNAL_HEALTH.target_classes)


# -- CSV ingestion ---------------------------------------------------------------

def test_csv_roundtrip(tmp_path, diabetes):
    path = tmp_path / "diabetes.csv"
    write_csv(path, diabetes)
    loaded = load_csv(path, DIABETES)
    assert loaded.y == diabetes.y
    a, b = np.nan_to_num(loaded.X, nan=-9), np.nan_to_num(diabetes.X, nan=-9)
    assert np.allclose(a, b, atol=1e-4)


def test_csv_header_mismatch_names_column(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("Pregnancies,Glucose,Wrong,SkinThickness,Insulin,BMI,"
                    "Diabetes Pedegree Function,Age,target\n1,2,3,4,5,6,7,8,Not\n")
    with pytest.raises(SchemaMismatch, match="BloodPressure"):
        load_csv(path, DIABETES)


def test_csv_kidney_id_column_dropped(tmp_path, caplog):
    ds = synth_dataset("kidney", n=30, seed=2)
    path = tmp_path / "kidney.csv"
    # write with a leading id column, like the public download
    import csv as csv_mod

    with open(path, "w", newline="") as fh:
        w = csv_mod.writer(fh)
        w.writerow(["id", *ds.schema.feature_names, "target"])
        for i, (row, label) in enumerate(zip(ds.X, ds.y)):
            w.writerow([i, *["" if np.isnan(v) else v for v in row], label])
    import logging

    with caplog.at_level(logging.INFO):
        loaded = load_csv(path, get_schema("kidney"))
    assert len(loaded) == 30
    assert any("excluded" in m for m in caplog.messages)


def test_synth_deterministic():
    a = synth_dataset("heart", n=50, seed=9)
    b = synth_dataset("heart", n=50, seed=9)
    assert a.y == b.y
    assert np.array_equal(np.nan_to_num(a.X), np.nan_to_num(b.X))
