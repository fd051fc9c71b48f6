# ===========================
# Module: Evaluation Metrics
# Last Modified: 14 Oct 2026
# ===========================
from dataclasses import dataclass
from typing import List

import numpy as np
from sklearn.metrics import confusion_matrix


@dataclass
class ClassificationReport:
    accuracy: float
    f1_macro: float
    f1_weighted: float
    per_class_f1: List[float]
    confusion: np.ndarray


# ---------------------
#     Regression
# ---------------------
def r2(pred: np.ndarray,
       target: np.ndarray):
    """Coefficient of determination pooled over every output of every window

    Args:
        pred (np.ndarray): Predictions, any shape
        target (np.ndarray): Targets, same number of elements

    Raises:
        ValueError: On a size mismatch or a constant target (SS_tot = 0)

    Returns:
        float: 1 - SS_res / SS_tot
    """
    pred = np.asarray(pred, dtype=np.float64).reshape(-1)
    target = np.asarray(target, dtype=np.float64).reshape(-1)
    if pred.size != target.size:
        raise ValueError(f'Prediction has {pred.size} values but target has {target.size}')
    ss_tot = np.sum((target - target.mean()) ** 2)
    if ss_tot == 0:
        raise ValueError('R2 is undefined for a constant target (SS_tot = 0)')
    ss_res = np.sum((target - pred) ** 2)

    return float(1.0 - ss_res / ss_tot)


# ---------------------
#    Classification
# ---------------------
def metrics_from_confusion(confusion: np.ndarray):
    """Accuracy, per-class F1, macro F1 and support-weighted F1 from a confusion matrix
    (rows = true class, columns = predicted class); F1 is 0 for a class with P + R = 0
    """
    confusion = np.asarray(confusion, dtype=np.float64)
    total = confusion.sum()
    if total == 0:
        raise ValueError('Confusion matrix is empty')
    true_pos = np.diag(confusion)
    predicted = confusion.sum(axis=0)
    support = confusion.sum(axis=1)

    precision = np.divide(true_pos, predicted, out=np.zeros_like(true_pos), where=predicted > 0)
    recall = np.divide(true_pos, support, out=np.zeros_like(true_pos), where=support > 0)
    denom = precision + recall
    f1 = np.divide(2 * precision * recall, denom, out=np.zeros_like(true_pos), where=denom > 0)

    return ClassificationReport(accuracy=float(true_pos.sum() / total),
                                f1_macro=float(f1.mean()),
                                f1_weighted=float(np.sum(f1 * support) / total),
                                per_class_f1=[float(v) for v in f1],
                                confusion=confusion.astype(np.int64))


def classification_metrics(predictions: np.ndarray,
                           labels: np.ndarray,
                           num_classes: int):
    """Accuracy plus macro and weighted F1 over classes 0..num_classes-1

    Raises:
        ValueError: On empty input or labels outside 0..num_classes-1

    Returns:
        ClassificationReport: Scalars, per-class F1 and the confusion matrix
    """
    predictions = np.asarray(predictions, dtype=np.int64).reshape(-1)
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if labels.size == 0:
        raise ValueError('Cannot compute classification metrics on empty input')
    if predictions.size != labels.size:
        raise ValueError(f'{predictions.size} predictions for {labels.size} labels')
    for name, values in (('labels', labels), ('predictions', predictions)):
        if values.min() < 0 or values.max() >= num_classes:
            raise ValueError(f'{name} must lie in 0..{num_classes - 1}')

    confusion = confusion_matrix(labels, predictions, labels=list(range(num_classes)))

    return metrics_from_confusion(confusion)
