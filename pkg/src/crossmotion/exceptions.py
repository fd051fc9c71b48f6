# ==========================
# Module: Exceptions
# Last Modified: 09 Oct 2026
# ==========================


class CrossMotionError(ValueError):
    """Base class for errors raised by crossmotion"""


class ShapeError(CrossMotionError):
    """Tensor or layer shapes do not compose"""


class DatasetError(CrossMotionError):
    """Dataset files are missing fields, malformed or out of range"""


class CheckpointError(CrossMotionError):
    """Checkpoint file is corrupt or belongs to another architecture"""


class ConfigError(CrossMotionError):
    """Run configuration failed validation"""


class ProtocolError(CrossMotionError):
    """Evaluation protocol invariant was violated (e.g. subject leakage)"""


class ReportError(CrossMotionError):
    """Report inputs are missing or inconsistent"""
