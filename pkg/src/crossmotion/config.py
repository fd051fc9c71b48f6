# ==========================
# Module: Run Configuration
# Last Modified: 15 Oct 2026
# ==========================
import json
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional, Union

from .datasets import HORIZON, MASK_VALUE, WINDOW_LENGTH
from .enums import Activation, DatasetName, Regime, ValidationSplit
from .exceptions import ConfigError
from .training import TrainConfig

DATA_ROOT_ENV = 'CDMP_DATA_ROOT'

# Config-file section -> training regime
STAGES = {'pretext': Regime.pretext,
          'downstream': Regime.downstream_frozen,
          'finetune': Regime.finetune,
          'baseline': Regime.supervised_baseline}
STAGE_KEYS = ('epochs', 'batch_size', 'learning_rate')


def _stage_default(name: str):
    return field(default_factory=lambda: TrainConfig.for_regime(STAGES[name]))


@dataclass
class RunConfig:
    """Fully resolved settings of one CLI run (written to run.json)"""
    dataset: DatasetName = DatasetName.ucihar
    root: Optional[str] = None
    out_dir: Optional[str] = None
    seed: int = 0
    window_length: int = WINDOW_LENGTH
    stride: Optional[int] = None
    horizon: int = HORIZON
    mask_value: float = MASK_VALUE
    mask_downstream: bool = False
    output_activation: Activation = Activation.sigmoid
    n_folds: int = 5
    validation_split: ValidationSplit = ValidationSplit.windows
    validation_fraction: float = 0.1
    label_fraction: float = 0.01
    workers: int = 1
    pretext: TrainConfig = _stage_default('pretext')
    downstream: TrainConfig = _stage_default('downstream')
    finetune: TrainConfig = _stage_default('finetune')
    baseline: TrainConfig = _stage_default('baseline')

    def __post_init__(self):
        try:
            if isinstance(self.dataset, str):
                self.dataset = DatasetName.from_str(self.dataset)
            if isinstance(self.output_activation, str):
                self.output_activation = Activation.from_str(self.output_activation)
            if isinstance(self.validation_split, str):
                self.validation_split = ValidationSplit.from_str(self.validation_split)
        except ValueError as e:
            raise ConfigError(str(e)) from None

        if self.output_activation not in (Activation.sigmoid, Activation.softmax):
            raise ConfigError(f'output_activation must be sigmoid or softmax, got {self.output_activation.name}')
        if not 40 <= int(self.window_length) <= 4096:
            raise ConfigError(f'window_length must be in 40..4096, got {self.window_length}')
        if not 1 <= int(self.horizon) < int(self.window_length):
            raise ConfigError(f'horizon must be in 1..{self.window_length - 1}, got {self.horizon}')
        if self.stride is not None and int(self.stride) < 1:
            raise ConfigError(f'stride must be >= 1, got {self.stride}')
        if int(self.n_folds) < 2:
            raise ConfigError(f'n_folds must be >= 2, got {self.n_folds}')
        if not 0 <= float(self.validation_fraction) < 1:
            raise ConfigError(f'validation_fraction must be in [0, 1), got {self.validation_fraction}')
        if not 0 < float(self.label_fraction) <= 1:
            raise ConfigError(f'label_fraction must be in (0, 1], got {self.label_fraction}')
        if int(self.workers) < 1:
            raise ConfigError(f'workers must be >= 1, got {self.workers}')
        if int(self.seed) < 0:
            raise ConfigError(f'seed must be >= 0, got {self.seed}')

    @property
    def effective_stride(self):
        return self.window_length // 2 if self.stride is None else int(self.stride)

    def stage(self, name: str,
              seed: Optional[int] = None):
        """TrainConfig of a stage with the run-level seed and fractions filled in"""
        if name not in STAGES:
            raise ConfigError(f'Unknown training stage {name}. Choose from {list(STAGES)}')
        return replace(getattr(self, name),
                       seed=self.seed if seed is None else seed,
                       regime=STAGES[name],
                       validation_fraction=self.validation_fraction)

    def data_root(self):
        """Dataset root from the config, else from CDMP_DATA_ROOT

        Raises:
            ConfigError: If neither is set or the directory does not exist
        """
        root = self.root or os.environ.get(DATA_ROOT_ENV)
        if not root:
            raise ConfigError(f'No dataset root given: pass --root or set {DATA_ROOT_ENV}')
        if not Path(root).is_dir():
            raise ConfigError(f'Dataset root {root} is not a directory')
        return Path(root)

    def to_dict(self):
        payload = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, TrainConfig):
                value = {key: getattr(value, key) for key in STAGE_KEYS}
            elif hasattr(value, 'name') and not isinstance(value, str):
                value = value.name
            payload[f.name] = value
        return payload

    @staticmethod
    def from_dict(payload: Dict[str, Any]):
        """Build a config from a JSON document, rejecting unknown keys

        Raises:
            ConfigError: On unknown keys or out-of-range values
        """
        if not isinstance(payload, dict):
            raise ConfigError('Config document must be a JSON object')
        known = {f.name for f in fields(RunConfig)}
        unknown = sorted(set(payload) - known)
        if unknown:
            raise ConfigError(f'Unknown config keys {unknown}. Allowed keys: {sorted(known)}')

        values = {}
        for key, value in payload.items():
            if key in STAGES:
                if not isinstance(value, dict):
                    raise ConfigError(f'Config section "{key}" must be an object with keys {list(STAGE_KEYS)}')
                bad = sorted(set(value) - set(STAGE_KEYS))
                if bad:
                    raise ConfigError(f'Unknown keys {bad} in config section "{key}". Allowed keys: {list(STAGE_KEYS)}')
                value = TrainConfig.for_regime(STAGES[key], **value)
            values[key] = value

        return RunConfig(**values)

    def merged(self, overrides: Dict[str, Any]):
        """New config with top-level keys (or stage sections) replaced; None values are skipped"""
        payload = self.to_dict()
        for key, value in overrides.items():
            if value is None:
                continue
            if key in STAGES:
                payload[key] = {**payload[key], **value}
            else:
                payload[key] = value
        return RunConfig.from_dict(payload)


def load_config(path: Union[str, Path]):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f'Config file not found: {path}')
    try:
        with open(path, encoding='utf-8') as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as e:
        raise ConfigError(f'{path} is not valid JSON: {e}') from None

    return RunConfig.from_dict(payload)
