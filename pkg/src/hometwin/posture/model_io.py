"""Versioned binary persistence for trained posture models.

File layout (little-endian): magic ``HTNET``, u8 version, u32 config-JSON
length + JSON, u16 tensor count, then per tensor: u16 name length + name,
u8 dtype code (0=f32, 1=f64), u8 ndim, u32 dims, raw bytes.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..errors import ModelFormatError
from .net import NetworkConfig, PostureNet

_MAGIC = b"HTNET"
_VERSION = 1
_DTYPES = {0: "<f4", 1: "<f8"}
_DTYPE_CODES = {np.dtype(np.float32): 0, np.dtype(np.float64): 1}


def save_model(net: PostureNet, path: str | Path) -> None:
    state = net.state_dict()
    blob = bytearray()
    blob += _MAGIC
    blob += bytes([_VERSION])
    config_json = json.dumps(net.config.to_dict(), sort_keys=True).encode("utf-8")
    blob += struct.pack("<I", len(config_json))
    blob += config_json
    blob += struct.pack("<H", len(state))
    for name in sorted(state):
        arr = state[name]
        raw_name = name.encode("utf-8")
        blob += struct.pack("<H", len(raw_name))
        blob += raw_name
        code = _DTYPE_CODES[np.dtype(arr.dtype)]
        blob += struct.pack("<BB", code, arr.ndim)
        for dim in arr.shape:
            blob += struct.pack("<I", dim)
        blob += arr.astype(_DTYPES[code]).tobytes()
    Path(path).write_bytes(bytes(blob))


def load_model(path: str | Path) -> PostureNet:
    data = Path(path).read_bytes()
    if data[: len(_MAGIC)] != _MAGIC:
        raise ModelFormatError(f"{path} is not a model file")
    version = data[len(_MAGIC)]
    if version != _VERSION:
        raise ModelFormatError(f"unsupported model file version {version}")
    pos = len(_MAGIC) + 1

    def take(n: int) -> bytes:
        nonlocal pos
        if pos + n > len(data):
            raise ModelFormatError(f"{path} is truncated")
        out = data[pos : pos + n]
        pos += n
        return out

    (config_len,) = struct.unpack("<I", take(4))
    try:
        config = NetworkConfig.from_dict(json.loads(take(config_len)))
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise ModelFormatError(f"bad model config block: {exc}") from exc

    (n_tensors,) = struct.unpack("<H", take(2))
    state: dict[str, np.ndarray] = {}
    for _ in range(n_tensors):
        (name_len,) = struct.unpack("<H", take(2))
        name = take(name_len).decode("utf-8")
        code, ndim = struct.unpack("<BB", take(2))
        if code not in _DTYPES:
            raise ModelFormatError(f"unknown tensor dtype code {code}")
        shape = tuple(struct.unpack("<I", take(4))[0] for _ in range(ndim))
        count = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(take(count * np.dtype(_DTYPES[code]).itemsize), dtype=_DTYPES[code])
        state[name] = arr.reshape(shape).copy()

    net = PostureNet(config)
    try:
        net.load_state_dict(state)
    except KeyError as exc:
        raise ModelFormatError(f"model file missing tensor {exc}") from exc
    return net
