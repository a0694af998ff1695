"""Hate speech detection and target classification toolkit."""

from ._core import (
    Classifier,
    DataError,
    FormatError,
    FunctionClassifier,
    Model,
    ModelError,
    TopicModel,
    TranslationError,
    UsageError,
    augment,
    class_weights,
    explain,
    fit_topics,
    is_english,
    load_dataset,
    metrics,
    normalize,
    report,
    run_corpus,
    table_row,
    train,
    weighted_ce_loss,
)

__all__ = [
    "Classifier",
    "DataError",
    "FormatError",
    "FunctionClassifier",
    "Model",
    "ModelError",
    "TopicModel",
    "TranslationError",
    "UsageError",
    "augment",
    "class_weights",
    "explain",
    "fit_topics",
    "is_english",
    "load_dataset",
    "metrics",
    "normalize",
    "report",
    "run_corpus",
    "table_row",
    "train",
    "weighted_ce_loss",
]
