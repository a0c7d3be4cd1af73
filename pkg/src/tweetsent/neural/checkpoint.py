"""
Binary checkpoint container.

Layout (all integers little-endian)::

    magic           8 bytes   b"TSNTCKPT"
    format_version  uint32
    manifest_len    uint32
    manifest        manifest_len bytes, UTF-8 JSON (sorted keys, compact)
    n_arrays        uint32
    n_arrays times:
        name_len    uint16
        name        name_len bytes, UTF-8
        ndim        uint8
        dims        ndim x uint64
        data        prod(dims) x float64, row-major

Array names are prefixed by kind: ``param/``, ``buffer/``, ``adam.m/`` and
``adam.v/``. The manifest holds ``format_version``, ``config`` (every
``ModelConfig`` field), ``seed``, ``adam_step`` and a free-form ``extra``
object. Writing is deterministic: the same state yields the same bytes.
"""
import json
import struct

import numpy as np

from ..exceptions import CheckpointError
from .model import ModelConfig, ModelState

MAGIC = b"TSNTCKPT"
FORMAT_VERSION = 1


def _write_array(fh, name, arr):
    arr = np.ascontiguousarray(arr, dtype="<f8")
    encoded = name.encode("utf-8")
    fh.write(struct.pack("<H", len(encoded)))
    fh.write(encoded)
    fh.write(struct.pack("<B", arr.ndim))
    fh.write(struct.pack(f"<{arr.ndim}Q", *arr.shape))
    fh.write(arr.tobytes(order="C"))


def _read_exact(fh, n):
    data = fh.read(n)
    if len(data) != n:
        raise CheckpointError("truncated checkpoint")
    return data


def _read_array(fh):
    (name_len,) = struct.unpack("<H", _read_exact(fh, 2))
    name = _read_exact(fh, name_len).decode("utf-8")
    (ndim,) = struct.unpack("<B", _read_exact(fh, 1))
    shape = struct.unpack(f"<{ndim}Q", _read_exact(fh, 8 * ndim))
    count = int(np.prod(shape, dtype=np.int64))
    arr = np.frombuffer(_read_exact(fh, 8 * count), dtype="<f8").reshape(shape)
    return name, arr.astype(np.float64)


def save_checkpoint(path, state, adam=None, extra=None):
    arrays = [(f"param/{k}", v) for k, v in state.params.items()]
    arrays += [(f"buffer/{k}", v) for k, v in state.buffers.items()]
    if adam is not None:
        arrays += [(f"adam.m/{k}", v) for k, v in adam.m.items()]
        arrays += [(f"adam.v/{k}", v) for k, v in adam.v.items()]
    manifest = {
        "format_version": FORMAT_VERSION,
        "config": state.config.to_dict(),
        "seed": state.config.seed,
        "adam_step": None if adam is None else int(adam.t),
        "extra": extra or {},
    }
    blob = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, len(blob)))
        fh.write(blob)
        fh.write(struct.pack("<I", len(arrays)))
        for name, arr in arrays:
            _write_array(fh, name, arr)


def load_checkpoint(path):
    """Read a checkpoint; returns ``(state, adam_arrays, manifest)``.

    ``adam_arrays`` is ``None`` when no optimizer moments were stored,
    otherwise a dict with keys ``m``, ``v`` and ``t``.
    """
    with open(path, "rb") as fh:
        if _read_exact(fh, len(MAGIC)) != MAGIC:
            raise CheckpointError(f"{path} is not a checkpoint")
        version, blob_len = struct.unpack("<II", _read_exact(fh, 8))
        if version != FORMAT_VERSION:
            raise CheckpointError(f"unsupported checkpoint version {version}")
        manifest = json.loads(_read_exact(fh, blob_len).decode("utf-8"))
        (n_arrays,) = struct.unpack("<I", _read_exact(fh, 4))
        groups = {"param": {}, "buffer": {}, "adam.m": {}, "adam.v": {}}
        for _ in range(n_arrays):
            name, arr = _read_array(fh)
            kind, _, key = name.partition("/")
            if kind not in groups:
                raise CheckpointError(f"unknown array kind in {name!r}")
            groups[kind][key] = arr
        if fh.read(1):
            raise CheckpointError("trailing bytes after last array")
    config = ModelConfig.from_dict(manifest["config"])
    state = ModelState(config, groups["param"], groups["buffer"])
    adam = None
    if manifest.get("adam_step") is not None:
        adam = {"m": groups["adam.m"], "v": groups["adam.v"], "t": manifest["adam_step"]}
    return state, adam, manifest
