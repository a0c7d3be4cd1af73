"""Optimization, training loop and evaluation metrics."""
from .metrics import MetricsReport, confusion_matrix, evaluate, evaluate_predictions
from .optim import AdamState, adam_step
from .training import (
    EncodedData,
    TrainHistory,
    class_weights,
    early_stop,
    evaluate_loss,
    minibatches,
    run_training,
    stratified_split,
)

__all__ = [
    "AdamState", "EncodedData", "MetricsReport", "TrainHistory", "adam_step", "class_weights",
    "confusion_matrix", "early_stop", "evaluate", "evaluate_loss", "evaluate_predictions",
    "minibatches", "run_training", "stratified_split",
]
