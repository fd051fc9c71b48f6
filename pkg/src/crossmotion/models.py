# ======================================
# Module: Model Architectures
# Last Modified: 13 Oct 2026
# ======================================
import hashlib
import json
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .enums import Activation, LayerKind
from .exceptions import ShapeError
from .layers import (ForwardCache, LayerParams, activation_backward,
                     activation_forward, conv1d_backward, conv1d_forward,
                     dense_backward, dense_forward, dropout_backward,
                     dropout_forward, glorot_uniform, maxpool1d_backward,
                     maxpool1d_forward)

NUM_AXES = 3
CONV_FILTERS = (128, 256, 384)
KERNEL_SIZE = 3
PRETEXT_FC_WIDTHS = (384, 120)
HAR_FC_WIDTHS = (512, 250, 100)
HAR_DROPOUT = 0.2


# -------------------------
#   Layer descriptors
# -------------------------
@dataclass(frozen=True)
class LayerSpec:
    """One layer of an architecture. Conv and dense layers carry a fused activation;
    dense layers may also carry dropout, applied after the activation."""
    kind: LayerKind
    input_shape: Tuple[int, ...]
    output_shape: Tuple[int, ...]
    kernel_size: int = 0
    units: int = 0
    activation: Activation = Activation.linear
    dropout: float = 0.0
    pool_size: int = 2
    frozen: bool = False
    block: str = 'fc'

    @property
    def has_params(self):
        return self.kind in (LayerKind.conv1d, LayerKind.dense)

    @property
    def param_shapes(self):
        if self.kind == LayerKind.conv1d:
            return (self.kernel_size, self.input_shape[1], self.units), (self.units,)
        if self.kind == LayerKind.dense:
            return (self.input_shape[0], self.units), (self.units,)
        return None

    @property
    def details(self):
        if self.kind == LayerKind.conv1d:
            return f'[conv, 1x{self.kernel_size}, {self.units}] + {self.activation.name}'
        if self.kind == LayerKind.maxpool1d:
            return f'[maxpool, 1x{self.pool_size}, stride = {self.pool_size}]'
        if self.kind == LayerKind.flatten:
            return 'flatten'
        if self.kind == LayerKind.dense:
            text = f'[dense, {self.units}] + {self.activation.name}'
            return text + (f', dropout {self.dropout:g}' if self.dropout else '')
        return self.activation.name

    def to_dict(self):
        return {'kind': self.kind.name,
                'input_shape': list(self.input_shape),
                'output_shape': list(self.output_shape),
                'kernel_size': self.kernel_size,
                'units': self.units,
                'activation': self.activation.name,
                'dropout': self.dropout,
                'pool_size': self.pool_size,
                'frozen': self.frozen,
                'block': self.block}

    @staticmethod
    def from_dict(payload: Dict):
        return LayerSpec(kind=LayerKind.from_str(payload['kind']),
                         input_shape=tuple(payload['input_shape']),
                         output_shape=tuple(payload['output_shape']),
                         kernel_size=int(payload['kernel_size']),
                         units=int(payload['units']),
                         activation=Activation.from_str(payload['activation']),
                         dropout=float(payload['dropout']),
                         pool_size=int(payload['pool_size']),
                         frozen=bool(payload['frozen']),
                         block=payload['block'])


def infer_output_shape(kind: LayerKind,
                       input_shape: Tuple[int, ...],
                       kernel_size: int = 0,
                       units: int = 0,
                       pool_size: int = 2):
    """Shape algebra of each layer kind (conv: L-K+1, pool: floor(L/size), flatten: product)"""
    if kind == LayerKind.conv1d:
        if len(input_shape) != 2 or input_shape[0] < kernel_size:
            raise ShapeError(f'conv1d with kernel {kernel_size} cannot take input shape {input_shape}')
        return (input_shape[0] - kernel_size + 1, units)
    if kind == LayerKind.maxpool1d:
        if len(input_shape) != 2 or input_shape[0] < pool_size:
            raise ShapeError(f'maxpool1d with size {pool_size} cannot take input shape {input_shape}')
        return (input_shape[0] // pool_size, input_shape[1])
    if kind == LayerKind.flatten:
        return (int(np.prod(input_shape)),)
    if kind == LayerKind.dense:
        if len(input_shape) != 1:
            raise ShapeError(f'dense layer needs a flat input, got shape {input_shape}')
        return (units,)
    return tuple(input_shape)


@dataclass(frozen=True)
class ArchitectureSpec:
    """Ordered layer list with a checked shape trace"""
    name: str
    input_shape: Tuple[int, ...]
    layers: Tuple[LayerSpec, ...]

    def __post_init__(self):
        shape = tuple(self.input_shape)
        for index, layer in enumerate(self.layers):
            if tuple(layer.input_shape) != shape:
                raise ShapeError(f'Layer {index} ({layer.kind.name}) expects input shape {layer.input_shape} '
                                 f'but its predecessor produces {shape}')
            expected = infer_output_shape(layer.kind, shape, layer.kernel_size, layer.units, layer.pool_size)
            if tuple(layer.output_shape) != expected:
                raise ShapeError(f'Layer {index} ({layer.kind.name}) declares output shape {layer.output_shape}, '
                                 f'shape algebra gives {expected}')
            shape = expected

    @property
    def output_shape(self):
        return self.layers[-1].output_shape if self.layers else tuple(self.input_shape)

    @property
    def shape_trace(self) -> List[Tuple[int, ...]]:
        return [layer.output_shape for layer in self.layers]

    @property
    def param_indices(self) -> List[int]:
        return [i for i, layer in enumerate(self.layers) if layer.has_params]

    @property
    def conv_indices(self) -> List[int]:
        """Indices of the convolution-block layers (convs, pools and the flatten)"""
        return [i for i, layer in enumerate(self.layers) if layer.block == 'conv']

    @property
    def feature_stop(self) -> int:
        """Index one past the last conv-block layer; the FC head starts here"""
        conv = self.conv_indices
        return conv[-1] + 1 if conv else 0

    def _digest(self, layers: Sequence[LayerSpec]):
        payload = [{k: v for k, v in layer.to_dict().items() if k != 'frozen'} for layer in layers]
        text = json.dumps({'input_shape': list(self.input_shape), 'layers': payload}, sort_keys=True)
        return hashlib.sha256(text.encode('utf-8')).hexdigest()[:16]

    @property
    def fingerprint(self):
        """Hash of the layer structure (freeze flags excluded)"""
        return self._digest(self.layers)

    @property
    def conv_fingerprint(self):
        return self._digest([self.layers[i] for i in self.conv_indices])

    def summary(self):
        """Tabulate the architecture as Module / Layer Details / Feature Shape

        Returns:
            pd.DataFrame: One row for the input and one per layer
        """
        rows = [{'Module': 'Input', 'Layer Details': '-', 'Feature Shape': ' x '.join(map(str, self.input_shape))}]
        for layer in self.layers:
            module = 'Conv. Blocks' if layer.block == 'conv' else f'{self.name} FC'
            rows.append({'Module': module,
                         'Layer Details': layer.details,
                         'Feature Shape': ' x '.join(map(str, layer.output_shape))})

        return pd.DataFrame(rows)

    def to_dict(self):
        return {'name': self.name,
                'input_shape': list(self.input_shape),
                'layers': [layer.to_dict() for layer in self.layers]}

    @staticmethod
    def from_dict(payload: Dict):
        return ArchitectureSpec(name=payload['name'],
                                input_shape=tuple(payload['input_shape']),
                                layers=tuple(LayerSpec.from_dict(p) for p in payload['layers']))


class _SpecBuilder:
    """Appends layers while tracking the running shape"""

    def __init__(self, input_shape: Tuple[int, ...]):
        self.shape = tuple(input_shape)
        self.layers: List[LayerSpec] = []

    def add(self, kind: LayerKind, **kwargs):
        out_shape = infer_output_shape(kind, self.shape,
                                       kwargs.get('kernel_size', 0),
                                       kwargs.get('units', 0),
                                       kwargs.get('pool_size', 2))
        self.layers.append(LayerSpec(kind=kind, input_shape=self.shape, output_shape=out_shape, **kwargs))
        self.shape = out_shape

    def add_conv_blocks(self, frozen: bool):
        for filters in CONV_FILTERS:
            for _ in range(2):
                self.add(LayerKind.conv1d, kernel_size=KERNEL_SIZE, units=filters,
                         activation=Activation.relu, frozen=frozen, block='conv')
            self.add(LayerKind.maxpool1d, pool_size=2, frozen=frozen, block='conv')
        self.add(LayerKind.flatten, frozen=frozen, block='conv')


# -------------------------
#   Architectures
# -------------------------
def build_pretext_spec(window_length: int = 120,
                       horizon: int = 24):
    """Motion-prediction network: three conv blocks, two hidden FC+ReLU layers and a linear output

    Args:
        window_length (int, optional): Samples per input window. Defaults to 120.
        horizon (int, optional): Number of predicted z samples. Defaults to 24.

    Returns:
        ArchitectureSpec: Spec named 'predict'
    """
    builder = _SpecBuilder((window_length, NUM_AXES))
    builder.add_conv_blocks(frozen=False)
    for width in PRETEXT_FC_WIDTHS:
        builder.add(LayerKind.dense, units=width, activation=Activation.relu)
    builder.add(LayerKind.dense, units=horizon, activation=Activation.linear, block='output')

    return ArchitectureSpec(name='predict', input_shape=(window_length, NUM_AXES), layers=tuple(builder.layers))


def build_har_spec(num_classes: int,
                   window_length: int = 120,
                   output_activation: Activation = Activation.sigmoid,
                   freeze_conv: bool = True):
    """Activity-recognition network: the pretext conv blocks followed by 512-250-100 FC+ReLU
    blocks (20% dropout on the first) and a num_classes output layer

    Args:
        num_classes (int): Number of activity classes (>= 2)
        window_length (int, optional): Samples per input window. Defaults to 120.
        output_activation (Activation, optional): sigmoid (default) or softmax.
        freeze_conv (bool, optional): Mark conv-block layers as frozen. Defaults to True.

    Raises:
        ValueError: If num_classes < 2 or the output activation is not sigmoid/softmax

    Returns:
        ArchitectureSpec: Spec named 'har'
    """
    if num_classes < 2:
        raise ValueError(f'num_classes must be at least 2, got {num_classes}')
    if output_activation not in (Activation.sigmoid, Activation.softmax):
        raise ValueError(f'Output activation must be sigmoid or softmax, got {output_activation.name}')

    builder = _SpecBuilder((window_length, NUM_AXES))
    builder.add_conv_blocks(frozen=freeze_conv)
    for i, width in enumerate(HAR_FC_WIDTHS):
        builder.add(LayerKind.dense, units=width, activation=Activation.relu,
                    dropout=HAR_DROPOUT if i == 0 else 0.0)
    builder.add(LayerKind.dense, units=num_classes, activation=output_activation, block='output')

    return ArchitectureSpec(name='har', input_shape=(window_length, NUM_AXES), layers=tuple(builder.layers))


# -------------------------
#   Parameters
# -------------------------
@dataclass
class ModelParams:
    """Parameters of every parametric layer, keyed by layer index"""
    layers: Dict[int, LayerParams] = field(default_factory=dict)
    fingerprint: str = ''

    def copy(self):
        return ModelParams(layers={i: p.copy() for i, p in self.layers.items()}, fingerprint=self.fingerprint)

    def checksum(self, indices: Optional[Sequence[int]] = None):
        """SHA-256 over the raw bytes of weights and biases (all layers or the given indices)"""
        digest = hashlib.sha256()
        for index in sorted(self.layers if indices is None else indices):
            if index not in self.layers:
                continue
            digest.update(str(index).encode())
            digest.update(np.ascontiguousarray(self.layers[index].weights).tobytes())
            digest.update(np.ascontiguousarray(self.layers[index].bias).tobytes())
        return digest.hexdigest()

    @property
    def num_parameters(self):
        return sum(p.size for p in self.layers.values())

    def check_compatible(self, spec: ArchitectureSpec):
        if self.fingerprint != spec.fingerprint:
            raise ShapeError(f'Parameters fingerprint {self.fingerprint} does not match '
                             f'architecture {spec.name} fingerprint {spec.fingerprint}')


def init_params(spec: ArchitectureSpec,
                seed: int = 0,
                dtype=np.float32):
    """Fan-based uniform weights and zero biases for every parametric layer, in layer order"""
    rng = np.random.default_rng(seed)
    layers = {}
    for index in spec.param_indices:
        layer = spec.layers[index]
        w_shape, b_shape = layer.param_shapes
        if layer.kind == LayerKind.conv1d:
            fan_in, fan_out = layer.kernel_size * w_shape[1], layer.kernel_size * w_shape[2]
        else:
            fan_in, fan_out = w_shape
        layers[index] = LayerParams(weights=glorot_uniform(w_shape, fan_in, fan_out, rng, dtype),
                                    bias=np.zeros(b_shape, dtype=dtype),
                                    frozen=layer.frozen)

    return ModelParams(layers=layers, fingerprint=spec.fingerprint)


def transfer_and_freeze(pretext_params: ModelParams,
                        har_spec: ArchitectureSpec,
                        seed: int = 0):
    """Copy conv-block weights from a trained pretext model into a freshly initialized HAR model
    and mark them frozen

    Args:
        pretext_params (ModelParams): Trained pretext parameters
        har_spec (ArchitectureSpec): Target architecture
        seed (int, optional): Seed of the FC-head initialization. Defaults to 0.

    Raises:
        ShapeError: If a conv layer is missing or has a different shape in the pretext parameters

    Returns:
        ModelParams: HAR parameters with frozen, bit-identical conv weights
    """
    params = init_params(har_spec, seed=seed, dtype=_params_dtype(pretext_params))
    for index in har_spec.conv_indices:
        if not har_spec.layers[index].has_params:
            continue
        source = pretext_params.layers.get(index)
        target = params.layers[index]
        if source is None:
            raise ShapeError(f'Pretext parameters have no layer {index} to transfer')
        if source.weights.shape != target.weights.shape or source.bias.shape != target.bias.shape:
            raise ShapeError(f'Layer {index}: pretext shape {source.weights.shape} does not match '
                             f'HAR shape {target.weights.shape}')
        params.layers[index] = LayerParams(weights=source.weights.copy(),
                                           bias=source.bias.copy(),
                                           frozen=True)

    return params


def unfreeze(params: ModelParams):
    """Clear every frozen flag (fine-tuning); Adam state of previously frozen layers starts from zero"""
    layers = {}
    for index, layer in params.layers.items():
        if layer.frozen:
            layers[index] = LayerParams(weights=layer.weights.copy(), bias=layer.bias.copy(), frozen=False)
        else:
            layers[index] = layer.copy()

    return ModelParams(layers=layers, fingerprint=params.fingerprint)


def _params_dtype(params: ModelParams):
    for layer in params.layers.values():
        return layer.weights.dtype
    return np.float32


# -------------------------
#   Execution
# -------------------------
def layer_forward(layer: LayerSpec,
                  params: Optional[LayerParams],
                  x: np.ndarray,
                  training: bool = False,
                  rng: Optional[np.random.Generator] = None):
    """Run one (batched) layer, returning its output and the cache entry for layer_backward"""
    if layer.kind == LayerKind.conv1d:
        out, conv_cache = conv1d_forward(x, params.weights, params.bias)
        out = activation_forward(out, layer.activation)
        return out, {'conv': conv_cache, 'out': out}
    if layer.kind == LayerKind.maxpool1d:
        out, pool_cache = maxpool1d_forward(x, layer.pool_size)
        return out, {'pool': pool_cache}
    if layer.kind == LayerKind.flatten:
        return x.reshape(x.shape[0], -1), {'shape': x.shape}
    if layer.kind == LayerKind.dense:
        out, dense_cache = dense_forward(x, params.weights, params.bias)
        out = activation_forward(out, layer.activation)
        dropped, mask = dropout_forward(out, layer.dropout, rng, training)
        return dropped, {'dense': dense_cache, 'out': out, 'mask': mask}
    if layer.kind == LayerKind.activation:
        out = activation_forward(x, layer.activation)
        return out, {'out': out}
    raise ValueError(f'Layer kind {layer.kind} not recognized')


def layer_backward(layer: LayerSpec,
                   params: Optional[LayerParams],
                   entry: Dict,
                   grad_output: np.ndarray,
                   need_input_grad: bool = True):
    """Backward pass of one layer

    Returns:
        (grad_input or None, (grad_weights, grad_bias) or None)
    """
    if layer.kind == LayerKind.conv1d:
        grad = activation_backward(grad_output, entry['out'], layer.activation)
        grad_input, grad_w, grad_b = conv1d_backward(grad, params.weights, entry['conv'], need_input_grad)
        return grad_input, (None if params.frozen else (grad_w, grad_b))
    if layer.kind == LayerKind.maxpool1d:
        return (maxpool1d_backward(grad_output, entry['pool']) if need_input_grad else None), None
    if layer.kind == LayerKind.flatten:
        return grad_output.reshape(entry['shape']), None
    if layer.kind == LayerKind.dense:
        grad = dropout_backward(grad_output, entry['mask'])
        grad = activation_backward(grad, entry['out'], layer.activation)
        grad_input, grad_w, grad_b = dense_backward(grad, params.weights, entry['dense'], need_input_grad)
        return grad_input, (None if params.frozen else (grad_w, grad_b))
    if layer.kind == LayerKind.activation:
        return activation_backward(grad_output, entry['out'], layer.activation), None
    raise ValueError(f'Layer kind {layer.kind} not recognized')


def _prepare_input(spec: ArchitectureSpec,
                   x: np.ndarray,
                   start: int):
    expected = spec.layers[start].input_shape if start < len(spec.layers) else spec.output_shape
    x = np.asarray(x)
    squeeze = False
    if tuple(x.shape) == tuple(expected):
        x, squeeze = x[None], True
    if tuple(x.shape[1:]) != tuple(expected):
        raise ShapeError(f'Input shape {x.shape} does not match {spec.name} input shape {tuple(expected)} '
                         f'(at layer {start})')
    return x, squeeze


def forward(spec: ArchitectureSpec,
            params: ModelParams,
            x: np.ndarray,
            training: bool = False,
            rng: Optional[np.random.Generator] = None,
            start: int = 0,
            stop: Optional[int] = None,
            cache: Optional[ForwardCache] = None):
    """Run layers start..stop-1 of the network on a single input or a batch

    Args:
        spec (ArchitectureSpec): Architecture to execute
        params (ModelParams): Parameters matching spec
        x (np.ndarray): Input example or batch (batch axis first)
        training (bool, optional): Enable dropout. Defaults to False (eval mode).
        rng (np.random.Generator, optional): Dropout randomness, required when training.
        start (int, optional): First layer to run. Defaults to 0.
        stop (int, optional): One past the last layer to run. Defaults to all layers.
        cache (ForwardCache, optional): Filled with per-layer entries for backward()

    Returns:
        np.ndarray: Network output (unbatched if the input was a single example)
    """
    stop = len(spec.layers) if stop is None else stop
    out, squeeze = _prepare_input(spec, x, start)
    dtype = _params_dtype(params)
    out = out.astype(dtype, copy=False)
    for index in range(start, stop):
        layer = spec.layers[index]
        out, entry = layer_forward(layer, params.layers.get(index), out, training, rng)
        if cache is not None:
            cache.push(index, entry)

    return out[0] if squeeze else out


def backward(spec: ArchitectureSpec,
             params: ModelParams,
             cache: ForwardCache,
             grad_output: np.ndarray):
    """Backpropagate through the layers recorded in cache

    Gradients stop below the lowest trainable layer.

    Returns:
        dict: layer index -> (grad_weights, grad_bias) for every trainable layer
    """
    if not len(cache):
        raise ShapeError('backward called with an empty forward cache')
    trainable = [i for i in cache.layer_indices if i in params.layers and not params.layers[i].frozen]
    if not trainable:
        return {}
    lowest = min(trainable)

    grads = {}
    grad = grad_output
    for index, entry in zip(reversed(cache.layer_indices), reversed(cache.entries)):
        if index < lowest:
            break
        grad, param_grads = layer_backward(spec.layers[index], params.layers.get(index), entry, grad,
                                           need_input_grad=index > lowest)
        if param_grads is not None:
            grads[index] = param_grads

    return grads


def predict(spec: ArchitectureSpec,
            params: ModelParams,
            x: np.ndarray,
            batch_size: int = 512,
            start: int = 0,
            stop: Optional[int] = None):
    """Eval-mode forward over a batch in chunks of batch_size"""
    if len(x) == 0:
        stop_index = len(spec.layers) if stop is None else stop
        shape = spec.layers[stop_index - 1].output_shape if stop_index else spec.input_shape
        return np.zeros((0, *shape), dtype=_params_dtype(params))
    chunks = [forward(spec, params, x[i:i + batch_size], training=False, start=start, stop=stop)
              for i in range(0, len(x), batch_size)]

    return np.concatenate(chunks, axis=0)


def with_frozen(spec: ArchitectureSpec,
                frozen: bool):
    """Copy of a spec with every conv-block freeze flag set to the given value"""
    layers = tuple(replace(layer, frozen=frozen) if layer.block == 'conv' else layer for layer in spec.layers)
    return ArchitectureSpec(name=spec.name, input_shape=spec.input_shape, layers=layers)
