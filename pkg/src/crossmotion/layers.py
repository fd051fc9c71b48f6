# ===================================
# Module: Layer Forward/Backward Ops
# Last Modified: 12 Oct 2026
# ===================================
"""Numerical core of the network: one forward and one backward function per layer type.

Arrays are channels-last. A batch of 1D signals has shape (batch, length, channels),
and dense layers take (batch, features). Layer functions also accept a single
unbatched example and return an unbatched result.
"""
from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .enums import Activation
from .exceptions import ShapeError


# ---------------------
#   Parameters
# ---------------------
@dataclass
class LayerParams:
    """Trainable parameters of one layer plus its Adam state"""
    weights: np.ndarray
    bias: np.ndarray
    frozen: bool = False
    adam_m: Tuple[np.ndarray, np.ndarray] = None
    adam_v: Tuple[np.ndarray, np.ndarray] = None
    step_count: int = 0

    def __post_init__(self):
        if self.adam_m is None:
            self.adam_m = (np.zeros_like(self.weights), np.zeros_like(self.bias))
        if self.adam_v is None:
            self.adam_v = (np.zeros_like(self.weights), np.zeros_like(self.bias))
        for moments in (self.adam_m, self.adam_v):
            if moments[0].shape != self.weights.shape or moments[1].shape != self.bias.shape:
                raise ShapeError(f'Adam moment shapes {moments[0].shape}/{moments[1].shape} do not match '
                                 f'parameter shapes {self.weights.shape}/{self.bias.shape}')

    @property
    def size(self):
        return int(self.weights.size + self.bias.size)

    def copy(self):
        return replace(self,
                       weights=self.weights.copy(),
                       bias=self.bias.copy(),
                       adam_m=(self.adam_m[0].copy(), self.adam_m[1].copy()),
                       adam_v=(self.adam_v[0].copy(), self.adam_v[1].copy()))

    def astype(self, dtype):
        return LayerParams(weights=self.weights.astype(dtype),
                           bias=self.bias.astype(dtype),
                           frozen=self.frozen,
                           adam_m=(self.adam_m[0].astype(dtype), self.adam_m[1].astype(dtype)),
                           adam_v=(self.adam_v[0].astype(dtype), self.adam_v[1].astype(dtype)),
                           step_count=self.step_count)


@dataclass
class ForwardCache:
    """Per-layer values stored by a training forward pass, in execution order"""
    entries: list = field(default_factory=list)
    layer_indices: list = field(default_factory=list)

    def push(self, layer_index: int, entry: Dict):
        self.entries.append(entry)
        self.layer_indices.append(layer_index)

    def __len__(self):
        return len(self.entries)


def glorot_uniform(shape: Tuple[int, ...],
                   fan_in: int,
                   fan_out: int,
                   rng: np.random.Generator,
                   dtype=np.float32):
    """Fan-based uniform init with bounds ±sqrt(6 / (fan_in + fan_out))"""
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


def _batched(x: np.ndarray, ndim: int):
    """Add a leading batch axis to an unbatched example"""
    if x.ndim == ndim - 1:
        return x[None], True
    if x.ndim != ndim:
        raise ShapeError(f'Expected a {ndim - 1}D example or {ndim}D batch, got shape {x.shape}')
    return x, False


# ---------------------
#     Convolution
# ---------------------
def conv1d_forward(x: np.ndarray,
                   weights: np.ndarray,
                   bias: np.ndarray):
    """Valid (unpadded), stride-1 1D convolution lowered to a matrix product (im2col)

    Args:
        x (np.ndarray): Input of shape (L, C_in) or (B, L, C_in)
        weights (np.ndarray): Kernel of shape (K, C_in, C_out)
        bias (np.ndarray): Bias of shape (C_out,)

    Raises:
        ShapeError: If input channels differ from kernel channels, or L < K

    Returns:
        Output of shape (L-K+1, C_out) (batched if input was) and the cache for conv1d_backward
    """
    xb, squeeze = _batched(x, 3)
    kernel, c_in, c_out = weights.shape
    if xb.shape[2] != c_in:
        raise ShapeError(f'Input shape {x.shape} has {xb.shape[2]} channels but kernel shape {weights.shape} expects {c_in}')
    if xb.shape[1] < kernel:
        raise ShapeError(f'Input length {xb.shape[1]} is shorter than kernel size {kernel} (input shape {x.shape})')

    batch, length, _ = xb.shape
    out_len = length - kernel + 1
    # (B, out_len, C_in, K) -> (B, out_len, K, C_in) so columns line up with weights[k, c]
    cols = sliding_window_view(xb, kernel, axis=1).transpose(0, 1, 3, 2)
    cols = np.ascontiguousarray(cols).reshape(batch * out_len, kernel * c_in)
    out = cols @ weights.reshape(kernel * c_in, c_out) + bias
    out = out.reshape(batch, out_len, c_out)

    cache = {'cols': cols, 'input_shape': xb.shape, 'squeeze': squeeze}
    return (out[0] if squeeze else out), cache


def conv1d_backward(grad_output: np.ndarray,
                    weights: np.ndarray,
                    cache: Dict,
                    need_input_grad: bool = True):
    """Backward pass of conv1d_forward

    Returns:
        (grad_input, grad_weights, grad_bias); grad_input is None when need_input_grad is False
    """
    if cache is None or 'cols' not in cache:
        raise ShapeError('conv1d backward called without a matching forward cache')
    batch, length, c_in = cache['input_shape']
    kernel, _, c_out = weights.shape
    out_len = length - kernel + 1
    g = grad_output.reshape(batch * out_len, c_out)

    grad_weights = (cache['cols'].T @ g).reshape(weights.shape)
    grad_bias = g.sum(axis=0)

    grad_input = None
    if need_input_grad:
        grad_cols = (g @ weights.reshape(kernel * c_in, c_out).T).reshape(batch, out_len, kernel, c_in)
        grad_input = np.zeros((batch, length, c_in), dtype=grad_output.dtype)
        for k in range(kernel):  # col2im
            grad_input[:, k:k + out_len, :] += grad_cols[:, :, k, :]
        if cache['squeeze']:
            grad_input = grad_input[0]

    return grad_input, grad_weights, grad_bias


# ---------------------
#     Max pooling
# ---------------------
def maxpool1d_forward(x: np.ndarray,
                      size: int = 2):
    """Non-overlapping max pooling (stride = size); a trailing remainder is dropped"""
    xb, squeeze = _batched(x, 3)
    batch, length, channels = xb.shape
    if length < size:
        raise ShapeError(f'Cannot max-pool input of shape {x.shape} with pool size {size}')

    out_len = length // size
    windows = xb[:, :out_len * size, :].reshape(batch, out_len, size, channels)
    argmax = windows.argmax(axis=2)
    out = np.take_along_axis(windows, argmax[:, :, None, :], axis=2)[:, :, 0, :]

    cache = {'argmax': argmax, 'input_shape': xb.shape, 'size': size, 'squeeze': squeeze}
    return (out[0] if squeeze else out), cache


def maxpool1d_backward(grad_output: np.ndarray,
                       cache: Optional[Dict]):
    """Route each output gradient to the argmax position recorded by the forward pass"""
    if cache is None or 'argmax' not in cache:
        raise ShapeError('maxpool1d backward called without a matching forward cache')
    batch, length, channels = cache['input_shape']
    size = cache['size']
    argmax = cache['argmax']
    g = grad_output.reshape(argmax.shape)
    out_len = argmax.shape[1]

    grad_windows = np.zeros((batch, out_len, size, channels), dtype=grad_output.dtype)
    np.put_along_axis(grad_windows, argmax[:, :, None, :], g[:, :, None, :], axis=2)
    grad_input = np.zeros((batch, length, channels), dtype=grad_output.dtype)
    grad_input[:, :out_len * size, :] = grad_windows.reshape(batch, out_len * size, channels)

    return grad_input[0] if cache['squeeze'] else grad_input


# ---------------------
#       Dense
# ---------------------
def dense_forward(x: np.ndarray,
                  weights: np.ndarray,
                  bias: np.ndarray):
    """Fully connected layer: x @ W + b with W of shape (N, M)"""
    xb, squeeze = _batched(x, 2)
    if xb.shape[1] != weights.shape[0]:
        raise ShapeError(f'Input shape {x.shape} does not match dense weights of shape {weights.shape}')
    out = xb @ weights + bias

    cache = {'input': xb, 'squeeze': squeeze}
    return (out[0] if squeeze else out), cache


def dense_backward(grad_output: np.ndarray,
                   weights: np.ndarray,
                   cache: Dict,
                   need_input_grad: bool = True):
    if cache is None or 'input' not in cache:
        raise ShapeError('dense backward called without a matching forward cache')
    g, _ = _batched(grad_output, 2)
    grad_weights = cache['input'].T @ g
    grad_bias = g.sum(axis=0)

    grad_input = None
    if need_input_grad:
        grad_input = g @ weights.T
        if cache['squeeze']:
            grad_input = grad_input[0]

    return grad_input, grad_weights, grad_bias


# ---------------------
#     Activations
# ---------------------
def activation_forward(x: np.ndarray,
                       kind: Activation):
    """Apply an elementwise activation (softmax normalizes over the last axis)"""
    if kind == Activation.linear:
        return x
    elif kind == Activation.relu:
        return np.maximum(x, 0)
    elif kind == Activation.sigmoid:
        # Split by sign so exp never overflows
        out = np.empty_like(x)
        pos = x >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
        exp_x = np.exp(x[~pos])
        out[~pos] = exp_x / (1.0 + exp_x)
        return out
    elif kind == Activation.softmax:
        shifted = np.exp(x - x.max(axis=-1, keepdims=True))
        return shifted / shifted.sum(axis=-1, keepdims=True)
    else:
        raise ValueError(f'Activation {kind} not recognized')


def activation_backward(grad_output: np.ndarray,
                        output: np.ndarray,
                        kind: Activation):
    """Backward pass of activation_forward, expressed through the forward output"""
    if kind == Activation.linear:
        return grad_output
    elif kind == Activation.relu:
        return grad_output * (output > 0)
    elif kind == Activation.sigmoid:
        return grad_output * output * (1.0 - output)
    elif kind == Activation.softmax:
        inner = (grad_output * output).sum(axis=-1, keepdims=True)
        return output * (grad_output - inner)
    else:
        raise ValueError(f'Activation {kind} not recognized')


# ---------------------
#       Dropout
# ---------------------
def dropout_forward(x: np.ndarray,
                    rate: float,
                    rng: Optional[np.random.Generator] = None,
                    training: bool = True):
    """Inverted dropout: kept units are scaled by 1/(1-rate); identity in eval mode

    Returns:
        Output array and the scaled keep-mask (None when the layer is an identity)
    """
    if not 0.0 <= rate < 1.0:
        raise ValueError(f'Dropout rate must be in [0, 1), got {rate}')
    if not training or rate == 0.0:
        return x, None
    if rng is None:
        raise ValueError('Dropout in training mode needs a seeded random generator')

    mask = (rng.random(x.shape) >= rate).astype(x.dtype) / x.dtype.type(1.0 - rate)
    return x * mask, mask


def dropout_backward(grad_output: np.ndarray,
                     mask: Optional[np.ndarray]):
    return grad_output if mask is None else grad_output * mask
