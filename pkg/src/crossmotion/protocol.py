# ==========================
# Module: Evaluation Protocol
# Last Modified: 16 Oct 2026
# ==========================
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from sklearn.model_selection import KFold

from .checkpoint import load_checkpoint, read_checkpoint_record, save_checkpoint
from .config import RunConfig
from .datasets import (NormalizationStats, WindowSet, apply_minmax, fit_minmax,
                       make_pretext_set, mask_tail, num_classes)
from .enums import Experiment, ValidationSplit
from .exceptions import ProtocolError
from .logger import logger
from .metrics import classification_metrics, metrics_from_confusion, r2
from .models import (ArchitectureSpec, ModelParams, build_har_spec,
                     build_pretext_spec, predict, transfer_and_freeze)
from .training import (label_fraction_subset, split_validation,
                       train_downstream, train_pretext)
from .utils import derive_seed, read_json, to_jsonable, write_json

# Keys mixed into the run seed so every stage of every fold draws its own stream
SEED_KEYS = {'validation': 1, 'pretext': 2, 'transfer': 3, 'downstream': 4,
             'finetune': 5, 'baseline': 6, 'subset': 7}
CLASSIFICATION_METRICS = ('accuracy', 'f1_macro', 'f1_weighted')


# ---------------------
#     Fold plans
# ---------------------
@dataclass
class Fold:
    index: int
    test_subjects: List[int]
    train_subjects: List[int]
    validation_seed: int


@dataclass
class FoldPlan:
    """User-split hold-out folds: every subject is tested exactly once"""
    folds: List[Fold]
    seed: int

    def __len__(self):
        return len(self.folds)

    def __iter__(self):
        return iter(self.folds)

    @property
    def subjects(self):
        return sorted(s for fold in self.folds for s in fold.test_subjects)

    def to_dict(self):
        return {'seed': self.seed,
                'folds': [{'index': f.index, 'test_subjects': f.test_subjects,
                           'train_subjects': f.train_subjects, 'validation_seed': f.validation_seed}
                          for f in self.folds]}


def make_user_folds(subject_ids: Union[np.ndarray, Sequence[int]],
                    seed: int,
                    n_folds: int = 5):
    """Shuffle the unique subject ids with a seeded RNG and partition them into n_folds
    near-equal test groups (sizes differ by at most one)

    Args:
        subject_ids (array-like): Subject id per window (duplicates allowed)
        seed (int): Shuffle seed
        n_folds (int, optional): Number of folds. Defaults to 5.

    Raises:
        ProtocolError: If there are fewer subjects than folds

    Returns:
        FoldPlan: Folds in index order
    """
    subjects = np.unique(np.asarray(subject_ids, dtype=np.int64))
    if len(subjects) < n_folds:
        raise ProtocolError(f'{len(subjects)} subjects cannot be split into {n_folds} user folds')

    splitter = KFold(n_splits=n_folds, shuffle=True, random_state=seed)
    folds = []
    for index, (train_idx, test_idx) in enumerate(splitter.split(subjects)):
        folds.append(Fold(index=index,
                          test_subjects=sorted(int(s) for s in subjects[test_idx]),
                          train_subjects=sorted(int(s) for s in subjects[train_idx]),
                          validation_seed=derive_seed(seed, index, SEED_KEYS['validation'])))
    logger.info(f'[+] User folds (seed {seed}): test sizes {[len(f.test_subjects) for f in folds]}')

    return FoldPlan(folds=folds, seed=seed)


# ---------------------
#     Result tables
# ---------------------
@dataclass
class FoldResult:
    fold: int
    test_subjects: List[int]
    metrics: Dict[str, float]
    confusion: Dict[str, List[List[int]]] = field(default_factory=dict)


@dataclass
class ResultTable:
    """Per-fold metrics of one experiment; mean and std are always recomputed from the folds"""
    dataset: str
    experiment: str
    seed: int
    folds: List[FoldResult] = field(default_factory=list)
    label_fraction: float = 1.0

    @property
    def metric_names(self):
        return list(self.folds[0].metrics) if self.folds else []

    def values(self, metric: str):
        return np.array([f.metrics[metric] for f in self.folds], dtype=np.float64)

    def mean(self, metric: str):
        return float(np.mean(self.values(metric)))

    def std(self, metric: str):
        """Population standard deviation across folds"""
        return float(np.std(self.values(metric)))

    def summary(self):
        return {name: (self.mean(name), self.std(name)) for name in self.metric_names}

    def to_dict(self):
        return {'dataset': self.dataset,
                'experiment': self.experiment,
                'seed': self.seed,
                'label_fraction': self.label_fraction,
                'folds': [{'fold': f.fold, 'test_subjects': f.test_subjects,
                           'metrics': f.metrics, 'confusion': f.confusion} for f in self.folds],
                'summary': {k: {'mean': m, 'std': s} for k, (m, s) in self.summary().items()}}

    def to_json(self, path: Union[str, Path]):
        return write_json(path, self.to_dict())

    @staticmethod
    def from_dict(payload: Dict):
        folds = [FoldResult(fold=int(f['fold']),
                            test_subjects=[int(s) for s in f['test_subjects']],
                            metrics={k: float(v) for k, v in f['metrics'].items()},
                            confusion=f.get('confusion') or {})
                 for f in payload['folds']]
        return ResultTable(dataset=payload['dataset'], experiment=payload['experiment'],
                           seed=int(payload['seed']), folds=folds,
                           label_fraction=float(payload.get('label_fraction', 1.0)))

    @staticmethod
    def from_json(path: Union[str, Path]):
        return ResultTable.from_dict(read_json(path))


def result_filename(experiment: Experiment,
                    label_fraction: float = 1.0):
    if experiment == Experiment.ablation_1pct:
        return f'results_ablation_{label_fraction:g}.json'
    return f'results_{experiment.name}.json'


# ---------------------
#    Fold data
# ---------------------
@dataclass
class FoldData:
    """Normalized windows of one fold"""
    train: WindowSet
    validation: WindowSet
    test: WindowSet
    normalization: NormalizationStats


def split_fold(windows: WindowSet,
               fold: Fold):
    """Split windows into training-user and test-user sets

    Raises:
        ProtocolError: If a subject is on both sides or a window falls on neither
    """
    overlap = set(fold.train_subjects) & set(fold.test_subjects)
    if overlap:
        raise ProtocolError(f'Fold {fold.index}: subjects {sorted(overlap)} are both train and test')
    train = windows.for_subjects(fold.train_subjects)
    test = windows.for_subjects(fold.test_subjects)
    if len(train) + len(test) != len(windows):
        raise ProtocolError(f'Fold {fold.index}: {len(windows) - len(train) - len(test)} windows '
                            f'belong to subjects outside the fold plan')
    if set(train.subjects) & set(test.subjects):
        raise ProtocolError(f'Fold {fold.index}: train and test windows share subjects')

    return train, test


def prepare_fold(windows: WindowSet,
                 fold: Fold,
                 config: RunConfig,
                 stats: Optional[NormalizationStats] = None):
    """Split a fold, hold out validation windows and min-max normalize with training-user stats

    Args:
        windows (WindowSet): All (raw) windows of a dataset
        fold (Fold): Fold to prepare
        config (RunConfig): Validation split settings
        stats (NormalizationStats, optional): Previously fitted stats (evaluation of saved runs)

    Returns:
        FoldData: Normalized train, validation and test windows
    """
    train, test = split_fold(windows, fold)
    if stats is None:
        stats = fit_minmax(train)
        if not set(train.subjects) <= set(fold.train_subjects):
            raise ProtocolError(f'Fold {fold.index}: normalization fitted on non-training subjects')

    groups = train.subject_ids if config.validation_split == ValidationSplit.subjects else None
    train_idx, val_idx = split_validation(len(train), config.validation_fraction, fold.validation_seed, groups)
    normalized = apply_minmax(train, stats)

    return FoldData(train=normalized.select(train_idx),
                    validation=normalized.select(val_idx),
                    test=apply_minmax(test, stats),
                    normalization=stats)


# ---------------------
#   Evaluation helpers
# ---------------------
def evaluate_pretext(spec: ArchitectureSpec,
                     params: ModelParams,
                     windows: WindowSet,
                     config: RunConfig):
    """Pooled R2 and MSE of the masked-tail prediction on (test) windows"""
    examples = make_pretext_set(windows, config.mask_value, config.horizon)
    pred = predict(spec, params, examples.inputs)
    return {'r2': r2(pred, examples.targets),
            'mse': float(np.mean((pred.astype(np.float64) - examples.targets) ** 2))}


def evaluate_classifier(spec: ArchitectureSpec,
                        params: ModelParams,
                        windows: WindowSet,
                        config: RunConfig):
    """Classification report of a HAR model on the labeled (test) windows"""
    labeled = windows.labeled()
    inputs = labeled.windows
    if config.mask_downstream:
        inputs = mask_tail(inputs, config.mask_value, config.horizon)
    scores = predict(spec, params, inputs)

    return classification_metrics(scores.argmax(axis=1), labeled.labels, spec.output_shape[0])


def _report_entry(report, prefix: str = ''):
    metrics = {f'{prefix}{name}': getattr(report, name) for name in CLASSIFICATION_METRICS}
    return metrics, report.confusion.tolist()


# ---------------------
#     Fold runner
# ---------------------
def fold_record(fold: Fold,
                config: RunConfig):
    """Settings that decide which windows a fold trains on"""
    return {'dataset': config.dataset.name,
            'seed': int(config.seed),
            'fold': fold.index,
            'test_subjects': fold.test_subjects,
            'train_subjects': fold.train_subjects,
            'validation_seed': fold.validation_seed,
            'validation_split': config.validation_split.name,
            'validation_fraction': float(config.validation_fraction),
            'window_length': int(config.window_length),
            'stride': config.effective_stride,
            'horizon': int(config.horizon),
            'mask_value': float(config.mask_value)}


def _plain(payload):
    return json.loads(json.dumps(to_jsonable(payload), sort_keys=True))


def record_mismatches(stored: Optional[Dict],
                      expected: Dict,
                      compare_training: bool = True):
    """Names of the settings in which a checkpoint's stage record differs from the expected one

    Every upstream record (the pretext model a classifier was transferred from) must belong
    to the same fold plan as well.

    Returns:
        list: Empty if the checkpoint may be reused
    """
    if stored is None:
        return ['stage record']
    stored, expected = _plain(stored), _plain(expected)
    fold = expected['fold']
    mismatches = [f'fold.{key}' for key in sorted(fold) if stored.get('fold', {}).get(key) != fold[key]]
    mismatches += [key for key in ('stage', 'label_fraction', 'mask_downstream') if stored.get(key) != expected.get(key)]
    if compare_training and stored.get('train') != expected.get('train'):
        mismatches.append('train')

    upstream = stored.get('upstream')
    while upstream is not None:
        if upstream.get('fold') != fold:
            mismatches.append(f'upstream {upstream.get("stage")} fold')
            break
        upstream = upstream.get('upstream')

    return mismatches


class FoldRunner:
    """Runs (or resumes from checkpoints) the training stages of one fold

    Checkpoints, normalization stats and training histories live under workdir/fold_<k>/.
    Each checkpoint carries the stage record it was trained under. A checkpoint is reused only
    when that record matches the current fold plan and data settings, and, for the stages the
    experiment itself trains, the current training settings. Upstream stages (the pretext model
    behind a classifier) are reused whatever epochs or learning rate they were trained with.
    """

    def __init__(self,
                 data: FoldData,
                 fold: Fold,
                 config: RunConfig,
                 workdir: Optional[Path] = None,
                 reuse: bool = True,
                 evaluate_only: bool = False):
        self.data = data
        self.fold = fold
        self.config = config
        self.fold_dir = None if workdir is None else Path(workdir) / f'fold_{fold.index}'
        self.reuse = reuse
        self.evaluate_only = evaluate_only
        self.final = set()
        self.fold_record = fold_record(fold, config)
        self.pretext_spec = build_pretext_spec(config.window_length, config.horizon)
        self.har_spec = build_har_spec(num_classes(config.dataset), config.window_length, config.output_activation)
        if self.fold_dir is not None and not evaluate_only:
            write_json(self.fold_dir / 'normalization.json', data.normalization.to_dict())

    def seed(self, stage: str):
        return derive_seed(self.config.seed, self.fold.index, SEED_KEYS[stage])

    def stage_record(self, stage: str,
                     label_fraction: Optional[float] = None):
        record = {'fold': self.fold_record,
                  'stage': stage,
                  'train': self.config.stage(stage, self.seed(stage)).to_dict(),
                  'label_fraction': label_fraction}
        if stage != 'pretext':
            record['mask_downstream'] = bool(self.config.mask_downstream)
        return record

    def _path(self, name: str):
        return None if self.fold_dir is None else self.fold_dir / name

    def _cached(self, name: str, spec: ArchitectureSpec, expected: Dict):
        """(params, stored record) of a reusable checkpoint, else None

        Raises:
            ProtocolError: When only evaluating and the checkpoint belongs to other settings
        """
        path = self._path(name)
        if not self.reuse or path is None or not path.exists():
            if self.evaluate_only:
                raise ProtocolError(f'Fold {self.fold.index}: {name} is needed but evaluation never trains')
            return None

        stored = read_checkpoint_record(path)
        mismatches = record_mismatches(stored, expected, compare_training=name in self.final and not self.evaluate_only)
        if mismatches:
            message = f'{path} was trained under other settings ({", ".join(mismatches)})'
            if self.evaluate_only:
                raise ProtocolError(message)
            logger.warning(f'[+] Fold {self.fold.index}: {message}; retraining')
            return None

        logger.info(f'[+] Fold {self.fold.index}: reusing {path}')
        return load_checkpoint(path, spec)[1], stored

    def _store(self, name: str, spec: ArchitectureSpec, params: ModelParams, history, record: Dict):
        if self.fold_dir is not None:
            save_checkpoint(self.fold_dir / name, spec, params, record=record)
            history.to_jsonl(self.fold_dir / name.replace('.ckpt', '.history.jsonl'))

    def pretext(self):
        """Pretext parameters and the stage record they were trained under"""
        expected = self.stage_record('pretext')
        cached = self._cached('pretext.ckpt', self.pretext_spec, expected)
        if cached is not None:
            return cached
        train = make_pretext_set(self.data.train, self.config.mask_value, self.config.horizon)
        validation = make_pretext_set(self.data.validation, self.config.mask_value, self.config.horizon)
        params, history = train_pretext(train, self.config.stage('pretext', self.seed('pretext')),
                                        validation=validation, spec=self.pretext_spec)
        record = {**expected, 'upstream': None}
        self._store('pretext.ckpt', self.pretext_spec, params, history, record)
        return params, record

    def _downstream(self,
                    name: str,
                    stage: str,
                    start: Callable[[], Tuple[Optional[ModelParams], Optional[Dict]]],
                    train: Optional[WindowSet],
                    label_fraction: Optional[float] = None):
        """Load a stage checkpoint, or train it from the (params, record) start() returns"""
        expected = self.stage_record(stage, label_fraction)
        cached = self._cached(name, self.har_spec, expected)
        if cached is not None:
            return cached
        train = self.data.train.labeled() if train is None else train
        initial, upstream = start()
        params, history = train_downstream(train, initial, self.config.stage(stage, self.seed(stage)), self.har_spec,
                                           validation=self.data.validation.labeled(),
                                           mask_inputs=self.config.mask_downstream,
                                           horizon=self.config.horizon, mask_value=self.config.mask_value)
        record = {**expected, 'upstream': upstream}
        self._store(name, self.har_spec, params, history, record)
        return params, record

    def transferred(self):
        params, record = self.pretext()
        return transfer_and_freeze(params, self.har_spec, seed=self.seed('transfer')), record

    def frozen(self, train: Optional[WindowSet] = None, name: str = 'har_frozen.ckpt',
               label_fraction: Optional[float] = None):
        return self._downstream(name, 'downstream', self.transferred, train, label_fraction)

    def finetune(self):
        return self._downstream('har_finetune.ckpt', 'finetune', self.frozen, None)

    def baseline(self, train: Optional[WindowSet] = None, name: str = 'har_supervised.ckpt',
                 label_fraction: Optional[float] = None):
        return self._downstream(name, 'baseline', lambda: (None, None), train, label_fraction)

    def subset(self):
        return label_fraction_subset(self.data.train.labeled(), self.config.label_fraction, self.seed('subset'))

    def run(self, experiment: Experiment):
        """Train what the experiment needs and evaluate it on the fold's test users"""
        self.final = set(required_checkpoints(experiment, self.config.label_fraction))
        test = self.data.test
        if experiment == Experiment.pretext:
            return evaluate_pretext(self.pretext_spec, self.pretext()[0], test, self.config), {}
        if experiment == Experiment.ss_frozen:
            params, _ = self.frozen()
        elif experiment == Experiment.ss_finetune:
            params, _ = self.finetune()
        elif experiment == Experiment.supervised:
            params, _ = self.baseline()
        elif experiment == Experiment.ablation_1pct:
            return self.run_ablation()
        else:
            raise ValueError(f'Experiment {experiment} not recognized')
        metrics, confusion = _report_entry(evaluate_classifier(self.har_spec, params, test, self.config))
        return metrics, {'har': confusion}

    def run_ablation(self):
        """Self-supervised (frozen) and fully-supervised arms trained on the same label subset"""
        subset = self.subset()
        tag = f'{self.config.label_fraction:g}'
        fraction = float(self.config.label_fraction)
        ss, _ = self.frozen(subset, name=f'ablation_ss_{tag}.ckpt', label_fraction=fraction)
        fs, _ = self.baseline(subset, name=f'ablation_fs_{tag}.ckpt', label_fraction=fraction)
        ss_metrics, ss_confusion = _report_entry(evaluate_classifier(self.har_spec, ss, self.data.test, self.config), 'ss_')
        fs_metrics, fs_confusion = _report_entry(evaluate_classifier(self.har_spec, fs, self.data.test, self.config), 'fs_')
        return {**ss_metrics, **fs_metrics}, {'ss': ss_confusion, 'fs': fs_confusion}


def required_checkpoints(experiment: Experiment,
                         label_fraction: float = 1.0):
    if experiment == Experiment.pretext:
        return ['pretext.ckpt']
    if experiment == Experiment.ss_frozen:
        return ['har_frozen.ckpt']
    if experiment == Experiment.ss_finetune:
        return ['har_finetune.ckpt']
    if experiment == Experiment.supervised:
        return ['har_supervised.ckpt']
    tag = f'{label_fraction:g}'
    return [f'ablation_ss_{tag}.ckpt', f'ablation_fs_{tag}.ckpt']


# ---------------------
#     Protocol
# ---------------------
def run_fold(windows: WindowSet,
             fold: Fold,
             experiment: Experiment,
             config: RunConfig,
             workdir: Optional[Union[str, Path]] = None,
             reuse: bool = True):
    """Prepare one fold, train the stages the experiment needs and evaluate on its test users"""
    data = prepare_fold(windows, fold, config)
    logger.info(f'[+] Fold {fold.index}: {len(data.train)} train / {len(data.validation)} validation / '
                f'{len(data.test)} test windows, test subjects {fold.test_subjects}')
    metrics, confusion = FoldRunner(data, fold, config, workdir, reuse).run(experiment)

    return FoldResult(fold=fold.index, test_subjects=fold.test_subjects, metrics=metrics, confusion=confusion)


def run_protocol(windows: WindowSet,
                 experiment: Experiment,
                 config: RunConfig,
                 workdir: Optional[Union[str, Path]] = None,
                 reuse: bool = True):
    """Repeat the user-split scheme over every fold and collect per-fold metrics

    Args:
        windows (WindowSet): All raw windows of the dataset (labels ignored for pretext training)
        experiment (Experiment): pretext, ss_frozen, ss_finetune, supervised or ablation_1pct
        config (RunConfig): Run settings (seed, stages, validation split, label fraction)
        workdir (str or Path, optional): Where checkpoints, histories and stats are written
        reuse (bool, optional): Resume stages from existing checkpoints. Defaults to True.

    Returns:
        ResultTable: One entry per fold, in fold order
    """
    plan = make_user_folds(windows.subject_ids, config.seed, config.n_folds)
    if workdir is not None:
        folds_path = Path(workdir) / 'folds.json'
        if reuse and folds_path.exists() and read_json(folds_path) != _plain(plan.to_dict()):
            logger.warning(f'[+] {folds_path} holds another fold plan: checkpoints trained under it are retrained')
        write_json(folds_path, plan.to_dict())

    folds = [run_fold(windows, fold, experiment, config, workdir, reuse) for fold in plan]
    table = ResultTable(dataset=config.dataset.name, experiment=experiment.name, seed=config.seed, folds=folds,
                        label_fraction=config.label_fraction if experiment == Experiment.ablation_1pct else 1.0)
    for name, (mean, std) in table.summary().items():
        logger.info(f'[+] {experiment.name} {name}: {mean:.4f} +/- {std:.4f}')

    return table


def evaluate_checkpoints(windows: WindowSet,
                         experiment: Experiment,
                         config: RunConfig,
                         workdir: Union[str, Path]):
    """Re-evaluate saved fold checkpoints on their test users without training

    Raises:
        FileNotFoundError: Naming every missing checkpoint, normalization or fold plan file
        ProtocolError: If the saved fold plan or a checkpoint's stage record belongs to other settings

    Returns:
        ResultTable: One entry per fold
    """
    workdir = Path(workdir)
    plan = make_user_folds(windows.subject_ids, config.seed, config.n_folds)
    names = required_checkpoints(experiment, config.label_fraction) + ['normalization.json']
    missing = [str(workdir / f'fold_{fold.index}' / name) for fold in plan for name in names
               if not (workdir / f'fold_{fold.index}' / name).exists()]
    if not (workdir / 'folds.json').exists():
        missing.append(str(workdir / 'folds.json'))
    if missing:
        raise FileNotFoundError(f'Missing checkpoint files: {", ".join(missing)}')
    saved = read_json(workdir / 'folds.json')
    if saved != _plain(plan.to_dict()):
        raise ProtocolError(f'{workdir / "folds.json"} holds the fold plan of seed {saved.get("seed")}, '
                            f'not the plan of seed {config.seed}')

    results = []
    for fold in plan:
        fold_dir = workdir / f'fold_{fold.index}'
        stats = NormalizationStats.from_dict(read_json(fold_dir / 'normalization.json'))
        data = prepare_fold(windows, fold, config, stats=stats)
        runner = FoldRunner(data, fold, config, workdir=workdir, reuse=True, evaluate_only=True)
        metrics, confusion = runner.run(experiment)
        results.append(FoldResult(fold=fold.index, test_subjects=fold.test_subjects,
                                  metrics=metrics, confusion=confusion))

    return ResultTable(dataset=config.dataset.name, experiment=experiment.name, seed=config.seed, folds=results,
                       label_fraction=config.label_fraction if experiment == Experiment.ablation_1pct else 1.0)


def check_result_table(table: ResultTable,
                       tolerance: float = 1e-9):
    """Recompute every stored classification scalar from its stored confusion matrix

    Raises:
        ProtocolError: If a stored scalar deviates by more than tolerance
    """
    for fold in table.folds:
        for arm, confusion in fold.confusion.items():
            prefix = '' if arm == 'har' else f'{arm}_'
            report = metrics_from_confusion(np.asarray(confusion))
            for name in CLASSIFICATION_METRICS:
                stored = fold.metrics[f'{prefix}{name}']
                if abs(stored - getattr(report, name)) > tolerance:
                    raise ProtocolError(f'Fold {fold.fold} {prefix}{name}: stored {stored} but the confusion '
                                        f'matrix gives {getattr(report, name)}')
    return True
