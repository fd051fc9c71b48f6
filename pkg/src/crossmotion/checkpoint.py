# ==========================
# Module: Weight Checkpoints
# Last Modified: 13 Oct 2026
# ==========================
"""Binary checkpoint format.

    b'CDMP' | u16 format version | u32 header length | JSON header | float32 blobs

All integers and floats are little-endian. The header lists the architecture and, per
parametric layer, its shapes, freeze flag and Adam step count. Blobs follow in header
order, six per layer: weights, bias, Adam m (weights, bias), Adam v (weights, bias).
An optional stage record (fold plan and training settings) rides in the header.
"""
import json
import struct
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np

from .exceptions import CheckpointError
from .layers import LayerParams
from .logger import logger
from .models import ArchitectureSpec, ModelParams
from .utils import to_jsonable

MAGIC = b'CDMP'
FORMAT_VERSION = 1
_BLOB_DTYPE = np.dtype('<f4')


def save_checkpoint(path: Union[str, Path],
                    spec: ArchitectureSpec,
                    params: ModelParams,
                    record: Optional[Dict] = None):
    """Write parameters (and Adam state) of a model to a checkpoint file

    Args:
        path (str or Path): Destination file
        spec (ArchitectureSpec): Architecture the parameters belong to
        params (ModelParams): Parameters to save
        record (dict, optional): Stage record stored in the header

    Returns:
        Path: The written file
    """
    params.check_compatible(spec)
    layers = []
    blobs = []
    for index in sorted(params.layers):
        layer = params.layers[index]
        layers.append({'index': index,
                       'weights_shape': list(layer.weights.shape),
                       'bias_shape': list(layer.bias.shape),
                       'frozen': bool(layer.frozen),
                       'step_count': int(layer.step_count)})
        for array in (layer.weights, layer.bias, *layer.adam_m, *layer.adam_v):
            blobs.append(np.ascontiguousarray(array, dtype=_BLOB_DTYPE).tobytes())

    header = {'fingerprint': spec.fingerprint, 'architecture': spec.to_dict(), 'layers': layers}
    if record is not None:
        header['record'] = to_jsonable(record)
    header = json.dumps(header, sort_keys=True).encode('utf-8')

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'wb') as fh:
        fh.write(MAGIC)
        fh.write(struct.pack('<HI', FORMAT_VERSION, len(header)))
        fh.write(header)
        for blob in blobs:
            fh.write(blob)

    logger.info(f'[+] Saved checkpoint {path} ({params.num_parameters} parameters)')
    return path


def _read_header(path: Path):
    """File bytes, decoded JSON header and the offset of the first blob"""
    if not path.exists():
        raise FileNotFoundError(f'Checkpoint not found: {path}')
    data = path.read_bytes()

    if data[:4] != MAGIC:
        raise CheckpointError(f'{path} is not a checkpoint (magic bytes {data[:4]!r})')
    if len(data) < 4 + struct.calcsize('<HI'):
        raise CheckpointError(f'{path} is truncated')
    version, header_len = struct.unpack_from('<HI', data, 4)
    if version != FORMAT_VERSION:
        raise CheckpointError(f'{path} has format version {version}, expected {FORMAT_VERSION}')
    offset = 4 + struct.calcsize('<HI')
    if offset + header_len > len(data):
        raise CheckpointError(f'{path} is truncated')
    header = json.loads(data[offset:offset + header_len].decode('utf-8'))

    return data, header, offset + header_len


def load_checkpoint(path: Union[str, Path],
                    spec: Optional[ArchitectureSpec] = None):
    """Read a checkpoint written by save_checkpoint

    Args:
        path (str or Path): Checkpoint file
        spec (ArchitectureSpec, optional): Expected architecture; a fingerprint mismatch is rejected.

    Raises:
        FileNotFoundError: If the file does not exist
        CheckpointError: On bad magic, unsupported version, truncation or fingerprint mismatch

    Returns:
        (ArchitectureSpec, ModelParams): Stored architecture and parameters (float32)
    """
    path = Path(path)
    data, header, offset = _read_header(path)

    stored_spec = ArchitectureSpec.from_dict(header['architecture'])
    if stored_spec.fingerprint != header['fingerprint']:
        raise CheckpointError(f'{path} header fingerprint does not match its stored architecture')
    if spec is not None and spec.fingerprint != header['fingerprint']:
        raise CheckpointError(f'{path} holds architecture {header["fingerprint"]}, '
                              f'expected {spec.name} {spec.fingerprint}')

    def take(shape):
        nonlocal offset
        count = int(np.prod(shape))
        end = offset + count * _BLOB_DTYPE.itemsize
        if end > len(data):
            raise CheckpointError(f'{path} is truncated')
        array = np.frombuffer(data, dtype=_BLOB_DTYPE, count=count, offset=offset).reshape(shape)
        offset = end
        return array.astype(np.float32)

    layers = {}
    for entry in header['layers']:
        w_shape, b_shape = tuple(entry['weights_shape']), tuple(entry['bias_shape'])
        weights, bias = take(w_shape), take(b_shape)
        adam_m = (take(w_shape), take(b_shape))
        adam_v = (take(w_shape), take(b_shape))
        layers[int(entry['index'])] = LayerParams(weights=weights, bias=bias, frozen=bool(entry['frozen']),
                                                  adam_m=adam_m, adam_v=adam_v,
                                                  step_count=int(entry['step_count']))
    if offset != len(data):
        raise CheckpointError(f'{path} has {len(data) - offset} trailing bytes')

    params = ModelParams(layers=layers, fingerprint=header['fingerprint'])
    for index in stored_spec.param_indices:
        expected = stored_spec.layers[index].param_shapes[0]
        if index not in layers or layers[index].weights.shape != expected:
            raise CheckpointError(f'{path}: layer {index} parameters do not match the stored architecture')

    return stored_spec, params


def read_checkpoint_record(path: Union[str, Path]):
    """Stage record saved with a checkpoint, or None if it was saved without one"""
    return _read_header(Path(path))[1].get('record')
