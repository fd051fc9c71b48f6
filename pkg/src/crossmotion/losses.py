# ==========================
# Module: Loss Functions
# Last Modified: 12 Oct 2026
# ==========================
from typing import Tuple

import numpy as np

from .exceptions import ShapeError

PROB_CLAMP = 1e-7
LOSS_KINDS = ('mse', 'cross_entropy', 'binary_cross_entropy')


def _check_shapes(pred: np.ndarray,
                  target: np.ndarray):
    if pred.shape != target.shape:
        raise ShapeError(f'Prediction shape {pred.shape} does not match target shape {target.shape}')


def _check_one_hot(target: np.ndarray):
    rows = target.reshape(-1, target.shape[-1])
    is_binary = np.all((rows == 0) | (rows == 1))
    if not is_binary or not np.all(rows.sum(axis=1) == 1):
        raise ValueError('Cross-entropy targets must be one-hot rows (a single 1 per row, zeros elsewhere)')


def mse_loss(pred: np.ndarray,
             target: np.ndarray) -> Tuple[float, np.ndarray]:
    """Mean of squared differences over every element"""
    _check_shapes(pred, target)
    diff = pred - target
    loss = float(np.mean(diff * diff))
    grad = (2.0 / diff.size) * diff

    return loss, grad.astype(pred.dtype, copy=False)


def cross_entropy_loss(pred: np.ndarray,
                       target: np.ndarray) -> Tuple[float, np.ndarray]:
    """Categorical cross-entropy -sum(t * log p) on probability vectors, averaged over the batch

    Probabilities are clamped to [1e-7, 1-1e-7]; the gradient is zero where the clamp is active.
    """
    _check_shapes(pred, target)
    _check_one_hot(target)
    n_rows = target.size // target.shape[-1]
    clamped = np.clip(pred, PROB_CLAMP, 1.0 - PROB_CLAMP)
    loss = float(-np.sum(target * np.log(clamped)) / n_rows)

    inside = (pred >= PROB_CLAMP) & (pred <= 1.0 - PROB_CLAMP)
    grad = -(target / clamped) * inside / n_rows

    return loss, grad.astype(pred.dtype, copy=False)


def binary_cross_entropy_loss(pred: np.ndarray,
                              target: np.ndarray) -> Tuple[float, np.ndarray]:
    """Per-class binary cross-entropy for independent sigmoid outputs, averaged over all elements"""
    _check_shapes(pred, target)
    _check_one_hot(target)
    clamped = np.clip(pred, PROB_CLAMP, 1.0 - PROB_CLAMP)
    loss = float(-np.mean(target * np.log(clamped) + (1.0 - target) * np.log(1.0 - clamped)))

    inside = (pred >= PROB_CLAMP) & (pred <= 1.0 - PROB_CLAMP)
    grad = (clamped - target) / (clamped * (1.0 - clamped)) * inside / pred.size

    return loss, grad.astype(pred.dtype, copy=False)


def loss(pred: np.ndarray,
         target: np.ndarray,
         kind: str = 'mse') -> Tuple[float, np.ndarray]:
    """Compute a loss value and its gradient with respect to the prediction

    Args:
        pred (np.ndarray): Network output
        target (np.ndarray): Regression target, or one-hot class target
        kind (str, optional): One of 'mse', 'cross_entropy', 'binary_cross_entropy'. Defaults to 'mse'.

    Returns:
        (float, np.ndarray): Scalar loss and gradient of the loss w.r.t. pred
    """
    if kind == 'mse':
        return mse_loss(pred, target)
    elif kind == 'cross_entropy':
        return cross_entropy_loss(pred, target)
    elif kind == 'binary_cross_entropy':
        return binary_cross_entropy_loss(pred, target)
    else:
        raise ValueError(f'Loss kind {kind} is invalid. Choose from {list(LOSS_KINDS)}')


def one_hot(labels: np.ndarray,
            num_classes: int,
            dtype=np.float32):
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise ValueError(f'Labels must lie in 0..{num_classes - 1}, got range {labels.min()}..{labels.max()}')
    encoded = np.zeros((labels.shape[0], num_classes), dtype=dtype)
    encoded[np.arange(labels.shape[0]), labels] = 1

    return encoded
