# ==========================
# Module: Gradient Checking
# Last Modified: 13 Oct 2026
# ==========================
from typing import Optional

import numpy as np

from .layers import LayerParams
from .logger import logger
from .losses import loss as compute_loss
from .models import LayerSpec, layer_backward, layer_forward

DEFAULT_STEP = 1e-5


def _relative_error(analytic: np.ndarray,
                    numeric: np.ndarray):
    if analytic.size == 0:
        return 0.0
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-8)
    return float(np.max(np.abs(analytic - numeric) / denom))


def _numeric_grad(f, array: np.ndarray, step: float):
    """Central differences of scalar f() w.r.t. every element of array (perturbed in place)"""
    grad = np.zeros_like(array)
    flat = array.reshape(-1)
    grad_flat = grad.reshape(-1)
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + step
        f_plus = f()
        flat[i] = original - step
        f_minus = f()
        flat[i] = original
        grad_flat[i] = (f_plus - f_minus) / (2.0 * step)
    return grad


def grad_check(layer: LayerSpec,
               x: np.ndarray,
               params: Optional[LayerParams] = None,
               seed: int = 0,
               step: float = DEFAULT_STEP,
               tolerance: Optional[float] = None):
    """Compare a layer's analytic gradients with central finite differences in double precision

    The scalar objective is sum(output * G) for a fixed random G. Dropout layers reuse one
    mask for every evaluation.

    Args:
        layer (LayerSpec): Layer description
        x (np.ndarray): Input example or batch
        params (LayerParams, optional): Layer parameters. Random ones are drawn when omitted.
        seed (int, optional): Seed for parameters, G and dropout masks. Defaults to 0.
        step (float, optional): Finite-difference step. Defaults to 1e-5.
        tolerance (float, optional): When set, an error above it is logged as a warning.

    Returns:
        float: Max relative error |analytic - numeric| / max(|analytic|, |numeric|, 1e-8)
            over the input and all parameters
    """
    rng = np.random.default_rng(seed)
    x = np.array(x, dtype=np.float64)
    if tuple(x.shape) == tuple(layer.input_shape):
        x = x[None]

    if layer.has_params:
        if params is None:
            w_shape, b_shape = layer.param_shapes
            params = LayerParams(weights=rng.standard_normal(w_shape), bias=rng.standard_normal(b_shape))
        params = LayerParams(weights=np.array(params.weights, dtype=np.float64),
                             bias=np.array(params.bias, dtype=np.float64),
                             frozen=False)

    training = layer.dropout > 0

    def run():
        return layer_forward(layer, params, x, training=training, rng=np.random.default_rng(seed + 1))

    out, entry = run()
    upstream = rng.standard_normal(out.shape)

    def objective():
        return float(np.sum(run()[0] * upstream))

    grad_input, param_grads = layer_backward(layer, params, entry, upstream, need_input_grad=True)
    errors = [_relative_error(grad_input, _numeric_grad(objective, x, step))]
    if param_grads is not None:
        errors.append(_relative_error(param_grads[0], _numeric_grad(objective, params.weights, step)))
        errors.append(_relative_error(param_grads[1], _numeric_grad(objective, params.bias, step)))

    max_error = max(errors)
    if tolerance is not None and max_error > tolerance:
        logger.warning(f'[+] Gradient check of {layer.kind.name} failed: relative error {max_error:.3e} > {tolerance:g}')
    else:
        logger.info(f'[+] Gradient check of {layer.kind.name}: relative error {max_error:.3e}')

    return max_error


def grad_check_loss(kind: str,
                    pred: np.ndarray,
                    target: np.ndarray,
                    step: float = DEFAULT_STEP):
    """Finite-difference check of a loss gradient w.r.t. the prediction (double precision)"""
    pred = np.array(pred, dtype=np.float64)
    target = np.array(target, dtype=np.float64)
    _, analytic = compute_loss(pred, target, kind)

    numeric = _numeric_grad(lambda: compute_loss(pred, target, kind)[0], pred, step)

    return _relative_error(analytic, numeric)
