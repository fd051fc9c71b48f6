import os
import sys
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

sys.path.insert(0, os.path.abspath(Path(__file__).resolve().parents[1] / 'src'))

from crossmotion.config import RunConfig  # noqa: E402
from crossmotion.datasets import WindowSet  # noqa: E402
from crossmotion.logger import logger  # noqa: E402

MOTIONSENSE_PREFIXES = ['dws', 'ups', 'wlk', 'sit', 'std', 'jog']


def class_signal(rng: np.random.Generator,
                 label: int,
                 length: int):
    """Tri-axial signal whose frequency and offset depend on the class"""
    t = np.arange(length) / 50.0
    freq = 0.5 + 0.7 * label
    base = np.stack([np.sin(2 * np.pi * freq * t + phase) for phase in (0.0, 1.0, 2.0)], axis=1)
    return base + 0.1 * label + 0.05 * rng.standard_normal((length, 3))


def _write_rows(path: Path, rows: np.ndarray, fmt: str = '%.6e'):
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, rows, fmt=fmt, delimiter='  ')


def write_ucihar(root: Path,
                 n_subjects: int = 30,
                 windows_per_class: int = 1,
                 seed: int = 0):
    """UCI HAR layout: train/ and test/ with Inertial Signals, labels 1..6 and subject ids"""
    rng = np.random.default_rng(seed)
    subjects = np.arange(1, n_subjects + 1)
    groups = {'train': subjects[:int(0.7 * n_subjects)], 'test': subjects[int(0.7 * n_subjects):]}
    for group, members in groups.items():
        signals, labels, subject_col = [], [], []
        for subject in members:
            for label in range(6):
                for _ in range(windows_per_class):
                    signals.append(class_signal(rng, label, 128))
                    labels.append(label + 1)
                    subject_col.append(subject)
        signals = np.stack(signals)
        for axis, name in enumerate('xyz'):
            _write_rows(root / group / 'Inertial Signals' / f'total_acc_{name}_{group}.txt', signals[:, :, axis])
        _write_rows(root / group / f'y_{group}.txt', np.array(labels)[:, None], fmt='%d')
        _write_rows(root / group / f'subject_{group}.txt', np.array(subject_col)[:, None], fmt='%d')
    return root


def write_motionsense(root: Path,
                      n_subjects: int = 24,
                      samples: int = 200,
                      seed: int = 0):
    """MotionSense layout: A_DeviceMotion_data/<activity>_<trial>/sub_<n>.csv"""
    rng = np.random.default_rng(seed)
    for label, prefix in enumerate(MOTIONSENSE_PREFIXES):
        for subject in range(1, n_subjects + 1):
            signal = class_signal(rng, label, samples)
            frame = pd.DataFrame({'attitude.roll': rng.standard_normal(samples),
                                  'userAcceleration.x': signal[:, 0],
                                  'userAcceleration.y': signal[:, 1],
                                  'userAcceleration.z': signal[:, 2]})
            path = root / 'A_DeviceMotion_data' / f'{prefix}_{label + 1}' / f'sub_{subject}.csv'
            path.parent.mkdir(parents=True, exist_ok=True)
            frame.to_csv(path)
    return root


def write_hapt(root: Path,
               n_users: int = 6,
               segment: int = 150,
               gap: int = 30,
               activities=range(1, 13),
               seed: int = 0):
    """HAPT layout: RawData/acc_expNN_userNN.txt plus labels.txt with 1-based inclusive intervals"""
    rng = np.random.default_rng(seed)
    raw = root / 'RawData'
    raw.mkdir(parents=True, exist_ok=True)
    intervals = []
    for user in range(1, n_users + 1):
        experiment = user
        parts, cursor = [], 0
        for activity in activities:
            parts.append(0.01 * rng.standard_normal((gap, 3)))
            cursor += gap
            parts.append(class_signal(rng, activity - 1, segment))
            intervals.append([experiment, user, activity, cursor + 1, cursor + segment])
            cursor += segment
        _write_rows(raw / f'acc_exp{experiment:02d}_user{user:02d}.txt', np.concatenate(parts), fmt='%.8f')
    _write_rows(raw / 'labels.txt', np.array(intervals), fmt='%d')
    return root


@pytest.fixture
def ucihar_root(tmp_path):
    return write_ucihar(tmp_path / 'UCI HAR Dataset')


@pytest.fixture
def small_ucihar_root(tmp_path):
    return write_ucihar(tmp_path / 'UCI HAR Dataset', n_subjects=5, windows_per_class=2)


@pytest.fixture
def motionsense_root(tmp_path):
    return write_motionsense(tmp_path / 'motionsense')


@pytest.fixture
def hapt_root(tmp_path):
    return write_hapt(tmp_path / 'HAPT')


@pytest.fixture
def labeled_windows():
    """60 windows of length 40, 6 balanced classes, 5 subjects, already in [0, 1]"""
    rng = np.random.default_rng(3)
    windows, labels, subjects = [], [], []
    for subject in range(1, 6):
        for label in range(6):
            for _ in range(2):
                windows.append(class_signal(rng, label, 40))
                labels.append(label)
                subjects.append(subject)
    windows = np.stack(windows)
    windows = (windows - windows.min()) / (windows.max() - windows.min())
    return WindowSet(windows=windows, subject_ids=np.array(subjects), labels=np.array(labels))


@pytest.fixture
def tiny_config(tmp_path):
    """Desk-scale run settings: short windows and one or two epochs per stage"""
    stage = {'epochs': 1, 'batch_size': 32}
    return RunConfig.from_dict({'dataset': 'ucihar',
                                'root': str(tmp_path),
                                'window_length': 40,
                                'horizon': 8,
                                'pretext': dict(stage, learning_rate=3e-4),
                                'downstream': dict(stage, epochs=2, learning_rate=1e-3),
                                'finetune': stage,
                                'baseline': dict(stage, epochs=2, learning_rate=1e-3)})


@pytest.fixture(autouse=True)
def quiet_logger():
    yield
    for handler in list(logger.handlers):
        handler.close()
        logger.removeHandler(handler)
