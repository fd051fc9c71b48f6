# =================================
# Module: Utility Functions
# Last Modified: 11 Oct 2026
# =================================
import enum
import hashlib
import json
from pathlib import Path
from typing import Any, Union

import numpy as np


def sha256_file(path: Union[str, Path],
                chunk_size: int = 1 << 20):
    """Compute the SHA-256 hex digest of a file

    Args:
        path (str or Path): File to hash
        chunk_size (int, optional): Bytes read per chunk. Defaults to 1 MiB.

    Returns:
        str: Hex digest
    """
    digest = hashlib.sha256()
    with open(path, 'rb') as fh:
        for chunk in iter(lambda: fh.read(chunk_size), b''):
            digest.update(chunk)

    return digest.hexdigest()


def to_jsonable(value: Any):
    """Convert numpy scalars/arrays and enums (recursively) into plain JSON types"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, enum.Enum):
        return value.name
    return value


def write_json(path: Union[str, Path],
               payload: Any):
    """Write JSON with sorted keys so identical payloads give identical bytes"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as fh:
        json.dump(to_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write('\n')

    return path


def read_json(path: Union[str, Path]):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f'Required file not found: {path}')
    with open(path, encoding='utf-8') as fh:
        return json.load(fh)


def derive_seed(seed: int,
                *keys: int):
    """Derive an independent child seed from a base seed and integer keys (e.g. fold index)"""
    state = np.random.SeedSequence([int(seed), *[int(k) for k in keys]]).generate_state(1)
    return int(state[0])
