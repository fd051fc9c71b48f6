# ==========================
# Module: Adam Optimizer
# Last Modified: 12 Oct 2026
# ==========================
from typing import Tuple

import numpy as np

from .layers import LayerParams


def adam_step(params: LayerParams,
              grads: Tuple[np.ndarray, np.ndarray],
              lr: float,
              beta1: float = 0.9,
              beta2: float = 0.999,
              eps: float = 1e-8):
    """Apply one bias-corrected Adam update to a layer's weights and bias

    Args:
        params (LayerParams): Current parameters and moment estimates
        grads (tuple): Gradients (grad_weights, grad_bias)
        lr (float): Learning rate (> 0)
        beta1 (float, optional): First-moment decay. Defaults to 0.9.
        beta2 (float, optional): Second-moment decay. Defaults to 0.999.
        eps (float, optional): Denominator offset. Defaults to 1e-8.

    Raises:
        ValueError: If lr is not positive

    Returns:
        LayerParams: New parameters (the input is not mutated); frozen params are returned as-is
    """
    if lr <= 0:
        raise ValueError(f'Learning rate must be > 0, got {lr}')
    if params.frozen:
        return params

    step = params.step_count + 1
    dtype = params.weights.dtype
    correction1 = 1.0 - beta1 ** step
    correction2 = 1.0 - beta2 ** step

    new_values, new_m, new_v = [], [], []
    for value, grad, m, v in zip((params.weights, params.bias), grads, params.adam_m, params.adam_v):
        grad = grad.astype(dtype, copy=False)
        m = beta1 * m + (1.0 - beta1) * grad
        v = beta2 * v + (1.0 - beta2) * (grad * grad)
        m_hat = m / correction1
        v_hat = v / correction2
        value = value - lr * m_hat / (np.sqrt(v_hat) + eps)
        new_values.append(value.astype(dtype, copy=False))
        new_m.append(m.astype(dtype, copy=False))
        new_v.append(v.astype(dtype, copy=False))

    return LayerParams(weights=new_values[0],
                       bias=new_values[1],
                       frozen=False,
                       adam_m=tuple(new_m),
                       adam_v=tuple(new_v),
                       step_count=step)
