# ==========================
# Module: Training Tasks
# Last Modified: 15 Oct 2026
# ==========================
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Dict, Iterator, List, Optional, Union

import numpy as np
from sklearn.model_selection import GroupShuffleSplit, train_test_split

from .datasets import HORIZON, MASK_VALUE, PretextSet, WindowSet, mask_tail
from .enums import Activation, Regime
from .exceptions import ConfigError, DatasetError, ProtocolError
from .layers import ForwardCache
from .logger import logger
from .losses import loss, one_hot
from .metrics import r2
from .models import (ArchitectureSpec, ModelParams, backward,
                     build_pretext_spec, forward, init_params, predict,
                     unfreeze, with_frozen)
from .optim import adam_step

# Per-regime defaults: (epochs, batch size, learning rate)
REGIME_DEFAULTS = {Regime.pretext: (80, 512, 3e-4),
                   Regime.downstream_frozen: (80, 512, 1e-4),
                   Regime.finetune: (20, 512, 1e-4),
                   Regime.supervised_baseline: (80, 512, 1e-4)}
MIN_EXAMPLES_FOR_SPLIT = 10


@dataclass
class TrainConfig:
    epochs: int = 80
    batch_size: int = 512
    learning_rate: float = 3e-4
    seed: int = 0
    regime: Regime = Regime.pretext
    label_fraction: float = 1.0
    validation_fraction: float = 0.1

    def __post_init__(self):
        if isinstance(self.regime, str):
            self.regime = Regime.from_str(self.regime)
        if int(self.epochs) < 1:
            raise ConfigError(f'epochs must be >= 1, got {self.epochs}')
        if int(self.batch_size) < 1:
            raise ConfigError(f'batch_size must be >= 1, got {self.batch_size}')
        if not float(self.learning_rate) > 0:
            raise ConfigError(f'learning_rate must be > 0, got {self.learning_rate}')
        if not 0 < float(self.label_fraction) <= 1:
            raise ConfigError(f'label_fraction must be in (0, 1], got {self.label_fraction}')
        if not 0 <= float(self.validation_fraction) < 1:
            raise ConfigError(f'validation_fraction must be in [0, 1), got {self.validation_fraction}')

    @staticmethod
    def for_regime(regime: Regime, **overrides):
        """Defaults of a training regime (80 epochs / 512 / 3e-4 for pretext, 1e-4 downstream,
        20 epochs for fine-tuning), with keyword overrides"""
        epochs, batch_size, learning_rate = REGIME_DEFAULTS[regime]
        values = {'epochs': epochs, 'batch_size': batch_size, 'learning_rate': learning_rate, 'regime': regime}
        values.update(overrides)
        return TrainConfig(**values)

    def to_dict(self):
        payload = asdict(self)
        payload['regime'] = self.regime.name
        return payload


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    val_metric: Optional[float]
    seconds: float


@dataclass
class TrainHistory:
    regime: str
    records: List[EpochRecord] = field(default_factory=list)
    best_epoch: int = -1

    def __len__(self):
        return len(self.records)

    def to_jsonl(self, path: Union[str, Path]):
        """One JSON record per epoch; the best epoch is flagged"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as fh:
            for record in self.records:
                row = asdict(record)
                row.update({'regime': self.regime, 'best': record.epoch == self.best_epoch})
                fh.write(json.dumps(row, sort_keys=True) + '\n')
        return path


def read_history(path: Union[str, Path]):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f'Training history not found: {path}')
    records, best, regime = [], -1, ''
    with open(path, encoding='utf-8') as fh:
        for line in fh:
            if not line.strip():
                continue
            row = json.loads(line)
            regime = row.pop('regime')
            if row.pop('best'):
                best = row['epoch']
            records.append(EpochRecord(**row))

    return TrainHistory(regime=regime, records=records, best_epoch=best)


# ---------------------
#     Mini-batching
# ---------------------
def iterate_minibatches(n: int,
                        batch_size: int,
                        rng: np.random.Generator) -> Iterator[np.ndarray]:
    """Seeded shuffle of range(n) cut into batches; the final partial batch is kept"""
    order = rng.permutation(n)
    for i in range(0, n, batch_size):
        yield order[i:i + batch_size]


def split_validation(n: int,
                     fraction: float,
                     seed: int,
                     groups: Optional[np.ndarray] = None):
    """Random train/validation index split (by window, or by group when groups are given)

    Returns:
        (np.ndarray, np.ndarray): Sorted train and validation indices
    """
    indices = np.arange(n)
    if fraction <= 0 or n < MIN_EXAMPLES_FOR_SPLIT:
        return indices, indices
    if groups is not None:
        splitter = GroupShuffleSplit(n_splits=1, test_size=fraction, random_state=seed)
        train_idx, val_idx = next(splitter.split(indices, groups=groups))
    else:
        train_idx, val_idx = train_test_split(indices, test_size=fraction, random_state=seed, shuffle=True)

    return np.sort(train_idx), np.sort(val_idx)


# ---------------------
#     Training loop
# ---------------------
def _fit(spec: ArchitectureSpec,
         params: ModelParams,
         train_x: np.ndarray,
         train_y: np.ndarray,
         val_x: np.ndarray,
         val_y: np.ndarray,
         config: TrainConfig,
         loss_kind: str,
         metric_fn: Callable[[np.ndarray, np.ndarray], Optional[float]],
         higher_is_better: bool,
         start: int = 0):
    """Mini-batch Adam training with best-validation checkpoint selection"""
    rng = np.random.default_rng(config.seed)
    params = params.copy()
    history = TrainHistory(regime=config.regime.name)
    best_params, best_score = None, None

    for epoch in range(config.epochs):
        tic = time.perf_counter()
        total, seen = 0.0, 0
        for batch in iterate_minibatches(len(train_x), config.batch_size, rng):
            cache = ForwardCache()
            out = forward(spec, params, train_x[batch], training=True, rng=rng, start=start, cache=cache)
            value, grad = loss(out, train_y[batch], loss_kind)
            for index, layer_grads in backward(spec, params, cache, grad).items():
                params.layers[index] = adam_step(params.layers[index], layer_grads, config.learning_rate)
            total += value * len(batch)
            seen += len(batch)

        val_out = predict(spec, params, val_x, batch_size=config.batch_size, start=start)
        val_loss, _ = loss(val_out, val_y, loss_kind)
        val_metric = metric_fn(val_out, val_y)
        record = EpochRecord(epoch=epoch, train_loss=total / seen, val_loss=val_loss,
                             val_metric=val_metric, seconds=time.perf_counter() - tic)
        history.records.append(record)

        score = val_metric if higher_is_better else val_loss
        improved = best_score is None or (score > best_score if higher_is_better else score < best_score)
        if improved:
            best_score, best_params = score, params.copy()
            history.best_epoch = epoch
        logger.info(f'[+] {config.regime.name} epoch {epoch + 1}/{config.epochs}: '
                    f'train loss {record.train_loss:.5f}, val loss {val_loss:.5f}'
                    + ('' if val_metric is None else f', val metric {val_metric:.4f}'))

    return best_params, history


def _pretext_r2(pred: np.ndarray,
                target: np.ndarray):
    try:
        return r2(pred, target)
    except ValueError:
        return None


def _accuracy(scores: np.ndarray,
              one_hot_targets: np.ndarray):
    return float(np.mean(scores.argmax(axis=1) == one_hot_targets.argmax(axis=1)))


def train_pretext(examples: PretextSet,
                  config: Optional[TrainConfig] = None,
                  validation: Optional[PretextSet] = None,
                  spec: Optional[ArchitectureSpec] = None,
                  params: Optional[ModelParams] = None):
    """Train the motion-prediction network with MSE

    Args:
        examples (PretextSet): Training examples
        config (TrainConfig, optional): Defaults to the pretext regime defaults.
        validation (PretextSet, optional): Held-out examples. When omitted, validation_fraction
            of the windows is split off (seeded); tiny sets validate on themselves.
        spec (ArchitectureSpec, optional): Defaults to build_pretext_spec for the example shapes.
        params (ModelParams, optional): Starting parameters. Defaults to a seeded init.

    Raises:
        DatasetError: If there are no training examples

    Returns:
        (ModelParams, TrainHistory): Parameters of the best-validation-MSE epoch and the history
    """
    config = config or TrainConfig.for_regime(Regime.pretext)
    if not len(examples):
        raise DatasetError('Cannot train the pretext model on an empty example set')
    if spec is None:
        spec = build_pretext_spec(window_length=examples.inputs.shape[1], horizon=examples.targets.shape[1])
    if params is None:
        params = init_params(spec, seed=config.seed)
    params.check_compatible(spec)

    if validation is None:
        train_idx, val_idx = split_validation(len(examples), config.validation_fraction, config.seed)
        examples, validation = examples.select(train_idx), examples.select(val_idx)

    logger.info(f'[+] Pretext training on {len(examples)} examples, validating on {len(validation)}')
    return _fit(spec, params, examples.inputs, examples.targets, validation.inputs, validation.targets,
                config, 'mse', _pretext_r2, higher_is_better=False)


def output_loss_kind(spec: ArchitectureSpec):
    """Sigmoid heads train with per-class binary cross-entropy, softmax heads with categorical"""
    activation = spec.layers[-1].activation
    return 'binary_cross_entropy' if activation == Activation.sigmoid else 'cross_entropy'


def train_downstream(windows: WindowSet,
                     params: Optional[ModelParams],
                     config: TrainConfig,
                     spec: ArchitectureSpec,
                     validation: Optional[WindowSet] = None,
                     mask_inputs: bool = False,
                     horizon: int = HORIZON,
                     mask_value: float = MASK_VALUE):
    """Train the activity classifier in one of the downstream regimes

    - downstream_frozen: conv blocks stay frozen (their features are computed once)
    - finetune: continue from a frozen-trained model with every layer trainable
    - supervised_baseline: train the same architecture end-to-end from a fresh init (params ignored)

    Args:
        windows (WindowSet): Labeled, normalized training windows
        params (ModelParams): Transferred (frozen regime) or frozen-trained (finetune) parameters
        config (TrainConfig): Training settings; config.regime selects the regime
        spec (ArchitectureSpec): HAR architecture
        validation (WindowSet, optional): Labeled validation windows. Split off when omitted.
        mask_inputs (bool, optional): Apply the pretext z-tail mask to inputs. Defaults to False.

    Raises:
        DatasetError: If any training or validation window lacks a label
        ProtocolError: If the frozen regime altered a conv parameter

    Returns:
        (ModelParams, TrainHistory): Parameters of the best-validation-accuracy epoch and the history
    """
    if windows.labels is None or not windows.is_labeled or not len(windows):
        raise DatasetError('Downstream training needs labels for every window')
    num_classes = spec.output_shape[0]

    if config.regime == Regime.downstream_frozen:
        if params is None:
            raise ConfigError('downstream_frozen regime needs transferred pretext parameters')
        params = params.copy()
        for index in spec.conv_indices:
            if index in params.layers:
                params.layers[index].frozen = True
    elif config.regime == Regime.finetune:
        if params is None:
            raise ConfigError('finetune regime needs a frozen-trained checkpoint')
        params = unfreeze(params)
    elif config.regime == Regime.supervised_baseline:
        if params is not None:
            logger.info('[+] supervised_baseline ignores the provided parameters')
        params = init_params(with_frozen(spec, False), seed=config.seed)
    else:
        raise ConfigError(f'Regime {config.regime.name} is not a downstream regime')
    params.check_compatible(spec)

    if validation is None:
        train_idx, val_idx = split_validation(len(windows), config.validation_fraction, config.seed)
        windows, validation = windows.select(train_idx), windows.select(val_idx)
    if not len(validation):
        logger.warning('[+] No labeled validation windows: validating on the training windows')
        validation = windows
    if validation.labels is None or not validation.is_labeled:
        raise DatasetError('Validation windows need labels')

    train_x, val_x = windows.windows, validation.windows
    if mask_inputs:
        train_x, val_x = mask_tail(train_x, mask_value, horizon), mask_tail(val_x, mask_value, horizon)
    train_y = one_hot(windows.labels, num_classes)
    val_y = one_hot(validation.labels, num_classes)

    start = 0
    conv_params = [i for i in spec.conv_indices if i in params.layers]
    conv_checksum = params.checksum(conv_params)
    if conv_params and all(params.layers[i].frozen for i in conv_params):
        start = spec.feature_stop
        train_x = predict(spec, params, train_x, batch_size=config.batch_size, stop=start)
        val_x = predict(spec, params, val_x, batch_size=config.batch_size, stop=start)
        logger.info(f'[+] Conv blocks frozen: precomputed {train_x.shape[1]}-dim features')

    logger.info(f'[+] {config.regime.name} training on {len(train_y)} windows, validating on {len(val_y)}')
    best, history = _fit(spec, params, train_x, train_y, val_x, val_y, config,
                         output_loss_kind(spec), _accuracy, higher_is_better=True, start=start)

    if config.regime == Regime.downstream_frozen and best.checksum(conv_params) != conv_checksum:
        raise ProtocolError('Frozen conv parameters changed during downstream training')

    return best, history


# ---------------------
#   Label fractions
# ---------------------
def label_fraction_subset(windows: WindowSet,
                          fraction: float,
                          seed: int = 0):
    """Stratified subset holding `fraction` of the labeled windows, at least one per class

    The subset size is max(num_classes, round(fraction * M)). Per-class counts follow the
    class proportions to within one window. The same seed always gives the same subset.

    Raises:
        ValueError: If fraction is outside (0, 1]
        DatasetError: If windows are unlabeled
    """
    if not 0 < fraction <= 1:
        raise ValueError(f'Label fraction must be in (0, 1], got {fraction}')
    if windows.labels is None or not windows.is_labeled:
        raise DatasetError('Label-fraction subsets need labeled windows')
    if fraction == 1:
        return windows

    classes, counts = np.unique(windows.labels, return_counts=True)
    target = max(len(classes), int(round(fraction * len(windows))))
    quotas = fraction * counts
    alloc = np.maximum(1, np.floor(quotas)).astype(np.int64)
    alloc = np.minimum(alloc, counts)
    while alloc.sum() < target:
        room = np.where(alloc < counts, quotas - alloc, -np.inf)
        alloc[int(np.argmax(room))] += 1
    while alloc.sum() > target:
        excess = np.where(alloc > 1, alloc - quotas, -np.inf)
        alloc[int(np.argmax(excess))] -= 1

    rng = np.random.default_rng(seed)
    chosen = []
    for cls, n in zip(classes, alloc):
        members = np.flatnonzero(windows.labels == cls)
        chosen.append(members[rng.permutation(len(members))[:n]])
    indices = np.sort(np.concatenate(chosen))
    logger.info(f'[+] Label fraction {fraction:g}: {len(indices)} of {len(windows)} windows')

    return windows.select(indices)


def class_histogram(windows: WindowSet) -> Dict[int, int]:
    classes, counts = np.unique(windows.labels, return_counts=True)
    return {int(c): int(n) for c, n in zip(classes, counts)}
