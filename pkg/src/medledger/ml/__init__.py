"""From-scratch disease-risk classifiers over the five dataset schemas."""

from .datasets import Dataset, load_csv, synth_dataset, write_csv
from .models import (
    ConfusionMatrix,
    TrainConfig,
    TrainedModel,
    evaluate,
    predict,
    train_and_select,
    train_model,
)
from .model_io import load_model, save_model
from .preprocess import deidentify, fit_preprocess
from .schemas import SCHEMAS, DatasetSchema, get_schema

__all__ = [
    "Dataset", "load_csv", "synth_dataset", "write_csv",
    "ConfusionMatrix", "TrainConfig", "TrainedModel",
    "evaluate", "predict", "train_and_select", "train_model",
    "load_model", "save_model", "deidentify", "fit_preprocess",
    "SCHEMAS", "DatasetSchema", "get_schema",
]
