"""Standalone MUXT dump reader/writer.

Implements the documented interchange format (see the muxq README) without
importing the muxq package: magic "MUXT", version u32=1, dtype u8=0 (f32),
layout u8 (0=activation, 1=weight), reserved u16=0, rows u64, cols u64,
then the row-major float32 payload. Little-endian throughout.
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"MUXT"
VERSION = 1
LAYOUT_ACTIVATION = 0
LAYOUT_WEIGHT = 1
_HEADER = struct.Struct("<4sIBBHQQ")


class MuxtFormatError(RuntimeError):
    pass


def write_muxt(path, data: np.ndarray, layout: int) -> None:
    arr = np.ascontiguousarray(data, dtype=np.float32)
    if arr.ndim != 2 or arr.size == 0:
        raise MuxtFormatError(f"payload must be a non-empty 2-D matrix, got {arr.shape}")
    if not np.isfinite(arr).all():
        raise MuxtFormatError("payload must be finite")
    if layout not in (LAYOUT_ACTIVATION, LAYOUT_WEIGHT):
        raise MuxtFormatError(f"unknown layout {layout}")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, 0, layout, 0, arr.shape[0], arr.shape[1]))
        fh.write(arr.astype("<f4", copy=False).tobytes())


def read_muxt(path) -> tuple[np.ndarray, int]:
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] != MAGIC:
        raise MuxtFormatError(f"{path}: bad magic {raw[:4]!r}")
    if len(raw) < _HEADER.size:
        raise MuxtFormatError(f"{path}: truncated header")
    _, version, dtype, layout, reserved, rows, cols = _HEADER.unpack_from(raw)
    if version != VERSION or dtype != 0 or reserved != 0:
        raise MuxtFormatError(f"{path}: unsupported header fields")
    expected = _HEADER.size + rows * cols * 4
    if len(raw) != expected:
        raise MuxtFormatError(f"{path}: payload size mismatch")
    data = np.frombuffer(raw, dtype="<f4", count=rows * cols, offset=_HEADER.size)
    return data.reshape(rows, cols).copy(), layout
