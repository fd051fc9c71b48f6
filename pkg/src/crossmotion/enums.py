# ==========================
# Module: Enums
# Last Modified: 09 Oct 2026
# ==========================
import enum


class DatasetName(enum.IntEnum):
    ucihar = 1
    motionsense = 2
    hapt = 3

    @staticmethod
    def from_str(dataset_name: str):
        name = dataset_name.strip().lower().replace(' ', '').replace('_', '').replace('-', '')
        if name == 'ucihar':
            return DatasetName.ucihar
        elif name == 'motionsense':
            return DatasetName.motionsense
        elif name == 'hapt':
            return DatasetName.hapt
        else:
            raise ValueError(f'Specified dataset of {dataset_name} is invalid. Choose from {DatasetName.list_str()}')

    @staticmethod
    def list_str():
        return ['ucihar', 'motionsense', 'hapt']

    @property
    def display_name(self):
        return {DatasetName.ucihar: 'UCI HAR',
                DatasetName.motionsense: 'MotionSense',
                DatasetName.hapt: 'HAPT'}[self]


class LayerKind(enum.IntEnum):
    conv1d = 1
    maxpool1d = 2
    flatten = 3
    dense = 4
    activation = 5

    @staticmethod
    def from_str(kind: str):
        try:
            return LayerKind[kind]
        except KeyError:
            raise ValueError(f'Specified layer kind of {kind} is invalid') from None

    @staticmethod
    def list_str():
        return [k.name for k in LayerKind]


class Activation(enum.IntEnum):
    linear = 1
    relu = 2
    sigmoid = 3
    softmax = 4

    @staticmethod
    def from_str(kind: str):
        try:
            return Activation[kind]
        except KeyError:
            raise ValueError(f'Specified activation of {kind} is invalid. Choose from {Activation.list_str()}') from None

    @staticmethod
    def list_str():
        return [a.name for a in Activation]


class Regime(enum.IntEnum):
    pretext = 1
    downstream_frozen = 2
    finetune = 3
    supervised_baseline = 4

    @staticmethod
    def from_str(regime: str):
        try:
            return Regime[regime.replace('-', '_')]
        except KeyError:
            raise ValueError(f'Specified regime of {regime} is invalid. Choose from {Regime.list_str()}') from None

    @staticmethod
    def list_str():
        return [r.name for r in Regime]


class Experiment(enum.IntEnum):
    pretext = 1
    ss_frozen = 2
    ss_finetune = 3
    supervised = 4
    ablation_1pct = 5

    @staticmethod
    def from_str(experiment: str):
        try:
            return Experiment[experiment.replace('-', '_')]
        except KeyError:
            raise ValueError(f'Specified experiment of {experiment} is invalid. Choose from {Experiment.list_str()}') from None

    @staticmethod
    def list_str():
        return [e.name for e in Experiment]


class ValidationSplit(enum.IntEnum):
    windows = 1
    subjects = 2

    @staticmethod
    def from_str(split: str):
        if split == 'windows':
            return ValidationSplit.windows
        elif split == 'subjects':
            return ValidationSplit.subjects
        else:
            raise ValueError(f'Specified validation split of {split} is invalid. Choose from {ValidationSplit.list_str()}')

    @staticmethod
    def list_str():
        return ['windows', 'subjects']
