"""Dense float32 matrices, deterministic synthetic activations, and MUXT dumps.

The MUXT dump format (little-endian) is the on-disk interchange format for
activation and weight matrices:

    magic   "MUXT"      4 bytes
    version u32 = 1
    dtype   u8  = 0     (float32; the only dtype defined)
    layout  u8          0 = activation (rows=tokens), 1 = weight (rows=in_features)
    reserved u16 = 0
    rows    u64
    cols    u64
    payload rows*cols float32, row-major

Synthetic generation uses numpy's Philox4x32-10 counter-based bit generator
keyed by ``SyntheticSpec.seed``, with float32 normals drawn through
``Generator.standard_normal``; equal specs reproduce the same matrix bit for bit.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadMagicError,
    ConfigError,
    HeaderFieldError,
    NonFinitePayloadError,
    TruncatedPayloadError,
    UnsupportedVersionError,
)

MAGIC = b"MUXT"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIBBHQQ")  # magic, version, dtype, layout, reserved, rows, cols
HEADER_SIZE = _HEADER.size


class Layout(enum.Enum):
    ACTIVATION = 0  # rows = tokens, cols = channels
    WEIGHT = 1  # rows = in_features, cols = out_features


@dataclass(frozen=True)
class DenseMatrix:
    """Immutable row-major float32 matrix with a layout tag.

    Constructors reject non-finite values; the backing array is made
    read-only so instances can be shared across threads.
    """

    data: np.ndarray
    layout: Layout = Layout.ACTIVATION

    def __post_init__(self):
        arr = np.ascontiguousarray(self.data, dtype=np.float32)
        if arr.ndim != 2:
            raise ConfigError(f"DenseMatrix must be 2-D, got ndim={arr.ndim}")
        if arr.size == 0:
            raise ConfigError("DenseMatrix must have at least one element")
        if not np.isfinite(arr).all():
            raise ConfigError("DenseMatrix admits finite values only")
        if not isinstance(self.layout, Layout):
            raise ConfigError(f"invalid layout: {self.layout!r}")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    def __eq__(self, other) -> bool:
        if not isinstance(other, DenseMatrix):
            return NotImplemented
        return self.layout is other.layout and np.array_equal(self.data, other.data)


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a deterministic activation matrix with planted outlier channels."""

    rows: int
    cols: int
    base_std: float = 1.0
    outlier_channels: tuple[int, ...] = field(default_factory=tuple)
    outlier_gain: float = 1.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "outlier_channels", tuple(self.outlier_channels))
        if self.rows < 1 or self.cols < 1:
            raise ConfigError(f"rows and cols must be >= 1, got {self.rows}x{self.cols}")
        if not self.base_std > 0:
            raise ConfigError(f"base_std must be > 0, got {self.base_std}")
        if not self.outlier_gain >= 1:
            raise ConfigError(f"outlier_gain must be >= 1, got {self.outlier_gain}")
        for c in self.outlier_channels:
            if not 0 <= c < self.cols:
                raise ConfigError(f"outlier channel {c} outside [0, {self.cols})")


def generate_synthetic(spec: SyntheticSpec) -> DenseMatrix:
    """Draw i.i.d. Normal(0, base_std^2) float32 entries and scale planted columns.

    Entries come from Philox4x32-10 keyed by ``spec.seed``; columns listed in
    ``spec.outlier_channels`` are then multiplied elementwise by
    ``spec.outlier_gain`` (a single float32 multiply per element, so the
    planted column equals the unplanted one times the gain exactly).
    """
    rng = np.random.Generator(np.random.Philox(key=spec.seed))
    m = rng.standard_normal((spec.rows, spec.cols), dtype=np.float32)
    if spec.base_std != 1.0:
        m *= np.float32(spec.base_std)
    gain = np.float32(spec.outlier_gain)
    for c in spec.outlier_channels:
        m[:, c] *= gain
    return DenseMatrix(m, Layout.ACTIVATION)


def write_dump(matrix: DenseMatrix, path) -> None:
    """Write a matrix to ``path`` in the MUXT format."""
    header = _HEADER.pack(
        MAGIC, FORMAT_VERSION, 0, matrix.layout.value, 0, matrix.rows, matrix.cols
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(matrix.data.astype("<f4", copy=False).tobytes())


def read_dump(path) -> DenseMatrix:
    """Read a MUXT file; round-trips ``write_dump`` output bit-exactly."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 4 or raw[:4] != MAGIC:
        raise BadMagicError(f"{path}: not a MUXT file (magic {raw[:4]!r})")
    if len(raw) < HEADER_SIZE:
        raise TruncatedPayloadError(f"{path}: header truncated at {len(raw)} bytes")
    _, version, dtype, layout, reserved, rows, cols = _HEADER.unpack_from(raw)
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(f"{path}: version {version}, expected {FORMAT_VERSION}")
    if dtype != 0:
        raise HeaderFieldError(f"{path}: unknown dtype tag {dtype}")
    if reserved != 0:
        raise HeaderFieldError(f"{path}: reserved field must be 0, got {reserved}")
    try:
        layout = Layout(layout)
    except ValueError:
        raise HeaderFieldError(f"{path}: unknown layout tag {layout}") from None
    if rows < 1 or cols < 1:
        raise HeaderFieldError(f"{path}: invalid shape {rows}x{cols}")
    expected = HEADER_SIZE + rows * cols * 4
    if len(raw) < expected:
        raise TruncatedPayloadError(
            f"{path}: payload needs {expected} bytes, file has {len(raw)}"
        )
    if len(raw) > expected:
        raise TruncatedPayloadError(f"{path}: {len(raw) - expected} trailing bytes")
    data = np.frombuffer(raw, dtype="<f4", count=rows * cols, offset=HEADER_SIZE)
    data = data.reshape(rows, cols)
    if not np.isfinite(data).all():
        raise NonFinitePayloadError(f"{path}: payload contains NaN/Inf")
    return DenseMatrix(data, layout)
