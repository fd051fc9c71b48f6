# ==========================
# CrossMotion
# ==========================
__version__ = '0.1.0'

from .checkpoint import load_checkpoint, save_checkpoint
from .config import RunConfig, load_config
from .datasets import (WindowSet, load_windows, make_pretext, make_pretext_set,
                       minmax, window)
from .enums import DatasetName, Experiment, Regime
from .metrics import classification_metrics, r2
from .models import (build_har_spec, build_pretext_spec, forward, init_params,
                     transfer_and_freeze)
from .protocol import ResultTable, make_user_folds, run_protocol
from .training import (TrainConfig, label_fraction_subset, train_downstream,
                       train_pretext)
