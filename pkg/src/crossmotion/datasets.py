# ==========================
# Module: Datasets
# Last Modified: 14 Oct 2026
# ==========================
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .enums import DatasetName
from .exceptions import DatasetError
from .logger import logger
from .utils import read_json, sha256_file, write_json

SAMPLE_RATE = 50
WINDOW_LENGTH = 120
HORIZON = 24
MASK_VALUE = -1.0
CLIP_RANGE = (-0.5, 1.5)
UNLABELED = -1

UCIHAR_ROW_LENGTH = 128
UCIHAR_ACTIVITIES = ['walking', 'walking_upstairs', 'walking_downstairs', 'sitting', 'standing', 'laying']
MOTIONSENSE_ACTIVITIES = {'dws': 'walking_downstairs', 'ups': 'walking_upstairs', 'wlk': 'walking',
                          'sit': 'sitting', 'std': 'standing', 'jog': 'jogging'}
MOTIONSENSE_COLUMNS = ['userAcceleration.x', 'userAcceleration.y', 'userAcceleration.z']
HAPT_ACTIVITIES = ['walking', 'walking_upstairs', 'walking_downstairs', 'sitting', 'standing', 'laying',
                   'stand_to_sit', 'sit_to_stand', 'sit_to_lie', 'lie_to_sit', 'stand_to_lie', 'lie_to_stand']

# Documented (subjects, classes) per dataset
ROSTERS = {DatasetName.ucihar: (30, 6),
           DatasetName.motionsense: (24, 6),
           DatasetName.hapt: (30, 12)}


def num_classes(dataset: DatasetName):
    return ROSTERS[dataset][1]


def activity_names(dataset: DatasetName):
    if dataset == DatasetName.ucihar:
        return list(UCIHAR_ACTIVITIES)
    elif dataset == DatasetName.motionsense:
        return list(MOTIONSENSE_ACTIVITIES.values())
    return list(HAPT_ACTIVITIES)


# ---------------------
#     Data types
# ---------------------
@dataclass
class RawRecording:
    """Continuous tri-axial accelerometer stream of one subject

    Labels are 0-based class ids per sample, UNLABELED (-1) where no activity applies.
    """
    subject_id: int
    samples: np.ndarray
    labels: Optional[np.ndarray] = None
    source: str = ''
    sample_rate: int = SAMPLE_RATE

    def __post_init__(self):
        if self.samples.ndim != 2 or self.samples.shape[1] != 3:
            raise DatasetError(f'{self.source}: samples must have shape (N, 3), got {self.samples.shape}')
        if self.sample_rate != SAMPLE_RATE:
            raise DatasetError(f'{self.source}: sample rate must be {SAMPLE_RATE} Hz, got {self.sample_rate}')
        if self.labels is not None and len(self.labels) != len(self.samples):
            raise DatasetError(f'{self.source}: {len(self.labels)} labels for {len(self.samples)} samples')

    def __len__(self):
        return len(self.samples)


@dataclass
class NormalizationStats:
    """Per-axis minimum and maximum fitted on training windows"""
    minimum: np.ndarray
    maximum: np.ndarray

    def to_dict(self):
        return {'min': [float(v) for v in self.minimum], 'max': [float(v) for v in self.maximum]}

    @staticmethod
    def from_dict(payload: Dict):
        return NormalizationStats(minimum=np.asarray(payload['min'], dtype=np.float64),
                                  maximum=np.asarray(payload['max'], dtype=np.float64))


@dataclass
class WindowSet:
    """Fixed-length windows with subject ids, labels (UNLABELED where unknown) and provenance"""
    windows: np.ndarray
    subject_ids: np.ndarray
    labels: Optional[np.ndarray] = None
    sources: List[str] = field(default_factory=list)
    normalization: Optional[NormalizationStats] = None

    def __post_init__(self):
        self.windows = np.asarray(self.windows, dtype=np.float32)
        self.subject_ids = np.asarray(self.subject_ids, dtype=np.int64)
        if self.windows.ndim != 3 or self.windows.shape[2] != 3:
            raise DatasetError(f'Windows must have shape (M, length, 3), got {self.windows.shape}')
        if len(self.subject_ids) != len(self.windows):
            raise DatasetError(f'{len(self.subject_ids)} subject ids for {len(self.windows)} windows')
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if len(self.labels) != len(self.windows):
                raise DatasetError(f'{len(self.labels)} labels for {len(self.windows)} windows')
        if self.sources and len(self.sources) != len(self.windows):
            raise DatasetError(f'{len(self.sources)} provenance entries for {len(self.windows)} windows')

    def __len__(self):
        return len(self.windows)

    @property
    def window_length(self):
        return self.windows.shape[1]

    @property
    def subjects(self):
        return sorted(int(s) for s in np.unique(self.subject_ids))

    @property
    def is_labeled(self):
        return self.labels is not None and bool(np.all(self.labels >= 0))

    def select(self, indices: Union[np.ndarray, Sequence[int]]):
        indices = np.asarray(indices, dtype=np.int64)
        return WindowSet(windows=self.windows[indices],
                         subject_ids=self.subject_ids[indices],
                         labels=None if self.labels is None else self.labels[indices],
                         sources=[self.sources[i] for i in indices] if self.sources else [],
                         normalization=self.normalization)

    def for_subjects(self, subjects: Sequence[int]):
        return self.select(np.flatnonzero(np.isin(self.subject_ids, list(subjects))))

    def labeled(self):
        """Windows carrying a class label"""
        if self.labels is None:
            raise DatasetError('Window set has no labels')
        return self.select(np.flatnonzero(self.labels >= 0))

    @staticmethod
    def concat(parts: Sequence['WindowSet'], window_length: int = WINDOW_LENGTH):
        parts = [p for p in parts if len(p)]
        if not parts:
            return WindowSet(windows=np.zeros((0, window_length, 3), dtype=np.float32),
                             subject_ids=np.zeros(0, dtype=np.int64),
                             labels=np.zeros(0, dtype=np.int64))
        has_labels = all(p.labels is not None for p in parts)
        return WindowSet(windows=np.concatenate([p.windows for p in parts]),
                         subject_ids=np.concatenate([p.subject_ids for p in parts]),
                         labels=np.concatenate([p.labels for p in parts]) if has_labels else None,
                         sources=[s for p in parts for s in p.sources])


@dataclass
class PretextExample:
    """Masked window (input) and the original z-axis tail it hides (target)"""
    input: np.ndarray
    target: np.ndarray
    past: int
    horizon: int


@dataclass
class PretextSet:
    """Batched pretext examples"""
    inputs: np.ndarray
    targets: np.ndarray
    subject_ids: np.ndarray

    def __len__(self):
        return len(self.inputs)

    def select(self, indices):
        indices = np.asarray(indices, dtype=np.int64)
        return PretextSet(inputs=self.inputs[indices], targets=self.targets[indices],
                          subject_ids=self.subject_ids[indices])


# ---------------------
#     File parsing
# ---------------------
def _require(path: Path):
    if not path.exists():
        raise FileNotFoundError(f'Required dataset file not found: {path}')
    return path


def _read_whitespace_table(path: Path):
    return pd.read_csv(_require(path), header=None, sep=r'\s+').values


def load_ucihar(root_dir: Union[str, Path],
                window_length: int = WINDOW_LENGTH):
    """Load the UCI HAR distribution as windows of total acceleration

    Each pre-segmented 128-sample row is cropped to its first window_length samples. The
    train and test groups are pooled; user splits are made later.

    Args:
        root_dir (str or Path): Directory containing train/ and test/
        window_length (int, optional): Samples kept per row. Defaults to 120.

    Raises:
        FileNotFoundError: If a distribution file is missing
        DatasetError: If a row does not have 128 values or a label is outside 1..6

    Returns:
        WindowSet: Windows with 0-based labels and subject ids
    """
    root = Path(root_dir)
    if not 0 < window_length <= UCIHAR_ROW_LENGTH:
        raise DatasetError(f'UCI HAR window length must be in 1..{UCIHAR_ROW_LENGTH}, got {window_length}')

    parts = []
    for group in ('train', 'test'):
        signal_dir = root / group / 'Inertial Signals'
        axes = []
        for axis in ('x', 'y', 'z'):
            path = signal_dir / f'total_acc_{axis}_{group}.txt'
            values = _read_whitespace_table(path)
            if values.shape[1] != UCIHAR_ROW_LENGTH:
                raise DatasetError(f'{path}: rows have {values.shape[1]} values, expected {UCIHAR_ROW_LENGTH}')
            axes.append(values[:, :window_length])
        labels = _read_whitespace_table(root / group / f'y_{group}.txt').reshape(-1)
        subjects = _read_whitespace_table(root / group / f'subject_{group}.txt').reshape(-1)

        if not all(len(a) == len(labels) for a in axes) or len(subjects) != len(labels):
            raise DatasetError(f'{root / group}: signal, label and subject files have different row counts')
        bad = (labels < 1) | (labels > len(UCIHAR_ACTIVITIES))
        if bad.any():
            row = int(np.flatnonzero(bad)[0])
            raise DatasetError(f'{root / group / f"y_{group}.txt"} row {row + 1}: label {labels[row]} outside 1..6')

        parts.append(WindowSet(windows=np.stack(axes, axis=2),
                               subject_ids=subjects.astype(np.int64),
                               labels=labels.astype(np.int64) - 1,
                               sources=[f'ucihar:{group}:{i}' for i in range(len(labels))]))

    windows = WindowSet.concat(parts, window_length)
    logger.info(f'[+] Loaded UCI HAR: {len(windows)} windows from {len(windows.subjects)} subjects')
    return windows


_MOTIONSENSE_DIR = re.compile(r'^([a-z]+)_(\d+)$')
_MOTIONSENSE_FILE = re.compile(r'^sub_(\d+)\.csv$')


def _read_motionsense_file(path: Path):
    dir_match = _MOTIONSENSE_DIR.match(path.parent.name)
    file_match = _MOTIONSENSE_FILE.match(path.name)
    if dir_match is None or file_match is None:
        raise DatasetError(f'Unexpected MotionSense path: {path}')
    prefix = dir_match.group(1)
    if prefix not in MOTIONSENSE_ACTIVITIES:
        raise DatasetError(f'Unknown MotionSense activity prefix "{prefix}" in {path}')

    frame = pd.read_csv(path)
    missing = [c for c in MOTIONSENSE_COLUMNS if c not in frame.columns]
    if missing:
        raise DatasetError(f'Malformed MotionSense header in {path}: missing columns {missing}')

    samples = frame[MOTIONSENSE_COLUMNS].to_numpy(dtype=np.float64)
    label = list(MOTIONSENSE_ACTIVITIES).index(prefix)
    return RawRecording(subject_id=int(file_match.group(1)),
                        samples=samples,
                        labels=np.full(len(samples), label, dtype=np.int64),
                        source=f'{path.parent.name}/{path.name}')


def load_motionsense(root_dir: Union[str, Path],
                     workers: int = 1):
    """Load MotionSense device-motion recordings (userAcceleration), one per subject and trial

    Args:
        root_dir (str or Path): Directory containing A_DeviceMotion_data/
        workers (int, optional): Parallel file readers. Defaults to 1.

    Raises:
        FileNotFoundError: If A_DeviceMotion_data/ is missing
        DatasetError: On a malformed header or an unknown activity prefix

    Returns:
        list: RawRecording per (subject, trial), ordered lexicographically by path
    """
    data_dir = _require(Path(root_dir) / 'A_DeviceMotion_data')
    paths = sorted(data_dir.glob('*/sub_*.csv'))
    if not paths:
        raise DatasetError(f'No MotionSense recordings found under {data_dir}')

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        recordings = list(pool.map(_read_motionsense_file, paths))

    logger.info(f'[+] Loaded MotionSense: {len(recordings)} recordings from '
                f'{len({r.subject_id for r in recordings})} subjects')
    return recordings


_HAPT_FILE = re.compile(r'^acc_exp(\d+)_user(\d+)\.txt$')


def load_hapt(root_dir: Union[str, Path],
              workers: int = 1):
    """Load HAPT raw accelerometer experiments with per-sample labels from labels.txt

    Label intervals are 1-based and inclusive. Samples outside every interval stay UNLABELED.

    Args:
        root_dir (str or Path): Directory containing RawData/
        workers (int, optional): Parallel file readers. Defaults to 1.

    Raises:
        FileNotFoundError: If RawData/ or labels.txt is missing
        DatasetError: If an interval is outside its file or an activity id is outside 1..12

    Returns:
        list: RawRecording per experiment file, ordered lexicographically by path
    """
    raw_dir = _require(Path(root_dir) / 'RawData')
    labels_path = raw_dir / 'labels.txt'
    intervals = _read_whitespace_table(labels_path).astype(np.int64)
    if intervals.ndim != 2 or intervals.shape[1] != 5:
        raise DatasetError(f'{labels_path}: expected 5 columns (experiment, user, activity, start, end)')

    paths = sorted(p for p in raw_dir.glob('acc_exp*_user*.txt') if _HAPT_FILE.match(p.name))
    if not paths:
        raise DatasetError(f'No HAPT accelerometer files found under {raw_dir}')

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        signals = list(pool.map(_read_whitespace_table, paths))

    recordings = []
    for path, samples in zip(paths, signals):
        match = _HAPT_FILE.match(path.name)
        experiment, user = int(match.group(1)), int(match.group(2))
        if samples.ndim != 2 or samples.shape[1] != 3:
            raise DatasetError(f'{path}: expected 3 columns, got shape {samples.shape}')
        labels = np.full(len(samples), UNLABELED, dtype=np.int64)
        for exp_id, user_id, activity, start, end in intervals[intervals[:, 0] == experiment]:
            if not 1 <= activity <= len(HAPT_ACTIVITIES):
                raise DatasetError(f'{labels_path}: activity id {activity} outside 1..12 (experiment {exp_id})')
            if user_id != user:
                raise DatasetError(f'{labels_path}: experiment {exp_id} lists user {user_id}, file {path.name} is user {user}')
            if start < 1 or end < start or end > len(samples):
                raise DatasetError(f'{labels_path}: interval {start}..{end} of experiment {exp_id} '
                                   f'is outside {path.name} ({len(samples)} samples)')
            labels[start - 1:end] = activity - 1
        recordings.append(RawRecording(subject_id=user, samples=samples.astype(np.float64),
                                       labels=labels, source=path.name))

    known = {r.source for r in recordings}
    orphans = sorted({int(e) for e in intervals[:, 0]} - {int(_HAPT_FILE.match(s).group(1)) for s in known})
    if orphans:
        raise DatasetError(f'{labels_path}: experiments {orphans} have labels but no accelerometer file')

    logger.info(f'[+] Loaded HAPT: {len(recordings)} experiments from '
                f'{len({r.subject_id for r in recordings})} users')
    return recordings


# ---------------------
#     Windowing
# ---------------------
def window(recording: RawRecording,
           length: int = WINDOW_LENGTH,
           stride: Optional[int] = None,
           labeled_only: bool = False):
    """Cut a recording into fixed-length windows with 50% overlap (stride = length/2)

    A window's label is the label shared by all of its samples, UNLABELED otherwise.

    Args:
        recording (RawRecording): Continuous recording
        length (int, optional): Window length. Defaults to 120.
        stride (int, optional): Hop between windows. Defaults to length // 2.
        labeled_only (bool, optional): Keep only windows with a single shared label. Defaults to False.

    Returns:
        WindowSet: floor((N - length) / stride) + 1 windows before label filtering (0 if N < length)
    """
    stride = length // 2 if stride is None else stride
    if stride < 1:
        raise ValueError(f'Window stride must be >= 1, got {stride}')
    n = len(recording)
    count = (n - length) // stride + 1 if n >= length else 0
    starts = np.arange(count, dtype=np.int64) * stride

    windows = np.stack([recording.samples[s:s + length] for s in starts]) if count else np.zeros((0, length, 3))
    if recording.labels is None:
        labels = np.full(count, UNLABELED, dtype=np.int64)
    else:
        labels = np.array([_shared_label(recording.labels[s:s + length]) for s in starts], dtype=np.int64)

    result = WindowSet(windows=windows,
                       subject_ids=np.full(count, recording.subject_id, dtype=np.int64),
                       labels=labels,
                       sources=[f'{recording.source}@{s}' for s in starts])
    if labeled_only:
        result = result.select(np.flatnonzero(labels >= 0))

    return result


def _shared_label(labels: np.ndarray):
    first = labels[0]
    return int(first) if first >= 0 and np.all(labels == first) else UNLABELED


def load_windows(dataset: DatasetName,
                 root_dir: Union[str, Path],
                 window_length: int = WINDOW_LENGTH,
                 stride: Optional[int] = None,
                 workers: int = 1):
    """Ingest a dataset distribution and return all of its windows

    UNLABELED windows (HAPT transitions between intervals) are kept for pretext training.
    """
    if dataset == DatasetName.ucihar:
        return load_ucihar(root_dir, window_length)
    elif dataset == DatasetName.motionsense:
        recordings = load_motionsense(root_dir, workers)
    elif dataset == DatasetName.hapt:
        recordings = load_hapt(root_dir, workers)
    else:
        raise ValueError(f'Dataset {dataset} not recognized')

    windows = WindowSet.concat([window(r, window_length, stride) for r in recordings], window_length)
    logger.info(f'[+] Windowed {dataset.display_name}: {len(windows)} windows '
                f'({int(np.sum(windows.labels >= 0))} labeled)')
    return windows


def dataset_files(dataset: DatasetName,
                  root_dir: Union[str, Path]):
    """Source files of a distribution (for cache hashing), ordered lexicographically"""
    root = Path(root_dir)
    if dataset == DatasetName.ucihar:
        files = []
        for group in ('train', 'test'):
            files += [root / group / 'Inertial Signals' / f'total_acc_{a}_{group}.txt' for a in 'xyz']
            files += [root / group / f'y_{group}.txt', root / group / f'subject_{group}.txt']
        return sorted(files)
    elif dataset == DatasetName.motionsense:
        return sorted((root / 'A_DeviceMotion_data').glob('*/sub_*.csv'))
    return sorted((root / 'RawData').glob('*.txt'))


def check_roster(windows: WindowSet,
                 dataset: DatasetName,
                 strict: bool = False):
    """Compare subject and class counts against the documented roster of a dataset

    Returns:
        bool: True if both counts match
    """
    expected_subjects, expected_classes = ROSTERS[dataset]
    n_subjects = len(windows.subjects)
    n_classes = 0 if windows.labels is None else len(np.unique(windows.labels[windows.labels >= 0]))
    ok = n_subjects == expected_subjects and n_classes == expected_classes
    if not ok:
        message = (f'{dataset.display_name} roster has {n_subjects} subjects / {n_classes} classes, '
                   f'expected {expected_subjects} / {expected_classes}')
        if strict:
            raise DatasetError(message)
        logger.warning(f'[+] {message}')

    return ok


# ---------------------
#    Normalization
# ---------------------
def fit_minmax(windows: WindowSet):
    """Fit per-axis min and max on (training) windows

    Raises:
        DatasetError: If the set is empty or an axis is constant
    """
    if not len(windows):
        raise DatasetError('Cannot fit normalization on an empty window set')
    flat = windows.windows.reshape(-1, 3).astype(np.float64)
    stats = NormalizationStats(minimum=flat.min(axis=0), maximum=flat.max(axis=0))
    degenerate = np.flatnonzero(stats.maximum <= stats.minimum)
    if degenerate.size:
        raise DatasetError(f'Degenerate axis {["xyz"[i] for i in degenerate]}: max equals min')

    return stats


def apply_minmax(windows: WindowSet,
                 stats: NormalizationStats,
                 clip: Tuple[float, float] = CLIP_RANGE):
    """x' = (x - min) / (max - min) per axis, clipped so out-of-range values stay clear of the mask"""
    scaled = (windows.windows.astype(np.float64) - stats.minimum) / (stats.maximum - stats.minimum)
    scaled = np.clip(scaled, clip[0], clip[1])

    return WindowSet(windows=scaled.astype(np.float32),
                     subject_ids=windows.subject_ids,
                     labels=windows.labels,
                     sources=windows.sources,
                     normalization=stats)


def minmax(mode: str,
           data: WindowSet,
           stats: Optional[NormalizationStats] = None):
    """Fit ('fit') or apply ('apply') min-max normalization"""
    if mode == 'fit':
        return fit_minmax(data)
    elif mode == 'apply':
        if stats is None:
            raise ValueError('minmax apply needs previously fitted stats')
        return apply_minmax(data, stats)
    else:
        raise ValueError(f'minmax mode must be "fit" or "apply", got {mode}')


# ---------------------
#     Pretext task
# ---------------------
def make_pretext(window_array: np.ndarray,
                 mask_value: float = MASK_VALUE,
                 horizon: int = HORIZON):
    """Hide the last `horizon` z samples of a normalized window

    x and y stay intact. z keeps its first length-horizon samples. The hidden tail is
    replaced by mask_value and becomes the target.
    """
    window_array = np.asarray(window_array)
    length = window_array.shape[0]
    if not 0 < horizon < length:
        raise ValueError(f'Horizon must be in 1..{length - 1}, got {horizon}')
    past = length - horizon
    masked = window_array.copy()
    masked[past:, 2] = mask_value

    return PretextExample(input=masked, target=window_array[past:, 2].copy(), past=past, horizon=horizon)


def make_pretext_set(windows: WindowSet,
                     mask_value: float = MASK_VALUE,
                     horizon: int = HORIZON):
    """Batched make_pretext over a window set (labels are ignored)"""
    length = windows.window_length
    if not 0 < horizon < length:
        raise ValueError(f'Horizon must be in 1..{length - 1}, got {horizon}')
    past = length - horizon
    inputs = windows.windows.copy()
    inputs[:, past:, 2] = mask_value

    return PretextSet(inputs=inputs,
                      targets=windows.windows[:, past:, 2].copy(),
                      subject_ids=windows.subject_ids.copy())


def mask_tail(windows: np.ndarray,
              mask_value: float = MASK_VALUE,
              horizon: int = HORIZON):
    """Apply the pretext z-tail mask to classifier inputs (masked-consistent downstream mode)"""
    masked = windows.copy()
    masked[:, windows.shape[1] - horizon:, 2] = mask_value
    return masked


# ---------------------
#  Prepared-window cache
# ---------------------
WINDOWS_BLOB = 'windows.f32'
MANIFEST = 'manifest.json'


def save_window_cache(cache_dir: Union[str, Path],
                      windows: WindowSet,
                      dataset: DatasetName,
                      root_dir: Union[str, Path],
                      stride: int,
                      source_hashes: Optional[Dict[str, str]] = None):
    """Write windows as a little-endian float32 blob plus a JSON manifest

    Returns:
        Path: Manifest path
    """
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    windows.windows.astype('<f4').tofile(cache_dir / WINDOWS_BLOB)

    if source_hashes is None:
        source_hashes = hash_sources(dataset, root_dir)
    manifest = {'dataset': dataset.name,
                'root': str(root_dir),
                'window_length': int(windows.window_length),
                'stride': int(stride),
                'count': len(windows),
                'subjects': windows.subjects,
                'subject_ids': windows.subject_ids.tolist(),
                'labels': None if windows.labels is None else windows.labels.tolist(),
                'normalization': None if windows.normalization is None else windows.normalization.to_dict(),
                'source_hashes': source_hashes}
    path = write_json(cache_dir / MANIFEST, manifest)
    logger.info(f'[+] Wrote window cache {cache_dir} ({len(windows)} windows, {len(windows.subjects)} subjects)')

    return path


def load_window_cache(cache_dir: Union[str, Path]):
    """Read a cache written by save_window_cache

    Returns:
        (WindowSet, dict): Windows and the manifest
    """
    cache_dir = Path(cache_dir)
    manifest = read_json(cache_dir / MANIFEST)
    blob = _require(cache_dir / WINDOWS_BLOB)
    data = np.fromfile(blob, dtype='<f4')
    expected = manifest['count'] * manifest['window_length'] * 3
    if data.size != expected:
        raise DatasetError(f'{blob} holds {data.size} values, manifest expects {expected}')

    normalization = manifest.get('normalization')
    windows = WindowSet(windows=data.reshape(manifest['count'], manifest['window_length'], 3),
                        subject_ids=np.asarray(manifest['subject_ids'], dtype=np.int64),
                        labels=None if manifest['labels'] is None else np.asarray(manifest['labels'], dtype=np.int64),
                        normalization=None if normalization is None else NormalizationStats.from_dict(normalization))

    return windows, manifest


def hash_sources(dataset: DatasetName,
                 root_dir: Union[str, Path]):
    root = Path(root_dir)
    return {str(p.relative_to(root)): sha256_file(p) for p in dataset_files(dataset, root) if p.exists()}


def cache_is_valid(cache_dir: Union[str, Path],
                   dataset: DatasetName,
                   root_dir: Union[str, Path],
                   window_length: int,
                   stride: int):
    """True if a cache exists for these window parameters and its source hashes still match"""
    path = Path(cache_dir) / MANIFEST
    if not path.exists() or not (Path(cache_dir) / WINDOWS_BLOB).exists():
        return False
    manifest = read_json(path)
    if (manifest.get('dataset') != dataset.name or manifest.get('window_length') != window_length
            or manifest.get('stride') != stride):
        return False

    return manifest.get('source_hashes') == hash_sources(dataset, root_dir)
