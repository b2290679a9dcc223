"""Symmetric abs-max quantization, granularity handling, and integer GEMM.

Conventions, fixed so that independent ports agree bit for bit:

* scale per group = max|x| / (2^(bits-1) - 1), computed in float64 and stored
  as float32; a group whose max is zero gets scale 1.0 and all-zero codes
* codes = round-half-away-from-zero(x / scale), the division in float64,
  then clamped to [-(2^(bits-1)-1), +(2^(bits-1)-1)]; the most negative
  two's-complement value is never produced
* dequantized element = code * scale; with float32 scales and |code| <= 127
  this product is exact in float64 and is then rounded once to float32
* integer GEMM accumulates exact int64 products and applies the activation
  scale before the weight scale
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ShapeError
from .tensorio import DenseMatrix, Layout

#: Sentinel for "no quantization" in bit-width fields.
FP_BITS = math.inf


class Granularity(enum.Enum):
    PER_TENSOR = "tensor"  # one scale for the whole matrix
    PER_TOKEN = "token"  # one scale per activation row
    PER_CHANNEL = "channel"  # one scale per weight column


_VALID_FOR_LAYOUT = {
    Layout.ACTIVATION: (Granularity.PER_TENSOR, Granularity.PER_TOKEN),
    Layout.WEIGHT: (Granularity.PER_TENSOR, Granularity.PER_CHANNEL),
}


@dataclass(frozen=True)
class QuantizedTensor:
    """Integer codes plus the float32 scales that map them back to reals."""

    q: np.ndarray  # int32, rows x cols
    scales: np.ndarray  # float32; length 1, rows, or cols per granularity
    bits: int
    granularity: Granularity

    def __post_init__(self):
        q = np.ascontiguousarray(self.q, dtype=np.int32)
        scales = np.ascontiguousarray(self.scales, dtype=np.float32)
        if q.ndim != 2:
            raise ConfigError("quantized tensor must be 2-D")
        if not 2 <= self.bits <= 8:
            raise ConfigError(f"bits must be in [2, 8], got {self.bits}")
        top = (1 << (self.bits - 1)) - 1
        if q.size and (q.max() > top or q.min() < -top):
            raise ConfigError(f"codes outside symmetric {self.bits}-bit range [-{top}, {top}]")
        expected = {
            Granularity.PER_TENSOR: 1,
            Granularity.PER_TOKEN: q.shape[0],
            Granularity.PER_CHANNEL: q.shape[1],
        }[self.granularity]
        if scales.shape != (expected,):
            raise ConfigError(f"expected {expected} scales, got shape {scales.shape}")
        if not (scales > 0).all():
            raise ConfigError("all scales must be > 0")
        q.setflags(write=False)
        scales.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "scales", scales)

    @property
    def rows(self) -> int:
        return self.q.shape[0]

    @property
    def cols(self) -> int:
        return self.q.shape[1]


def _round_half_away(t: np.ndarray) -> np.ndarray:
    # numpy's round() is half-to-even; the toolkit contract is half away from zero.
    return np.copysign(np.floor(np.abs(t) + 0.5), t)


def _check_bits(bits) -> int:
    if not (isinstance(bits, (int, np.integer)) and 2 <= bits <= 8):
        raise ConfigError(f"bits must be an integer in [2, 8], got {bits!r}")
    return int(bits)


def quantize_absmax(m: DenseMatrix, bits: int, g: Granularity) -> QuantizedTensor:
    """Quantize symmetrically, one abs-max scale per granularity group.

    Args:
        m: source matrix; ``g`` must be valid for its layout
           (PER_TOKEN only on activations, PER_CHANNEL only on weights).
        bits: integer width in [2, 8].
        g: scale-sharing granularity.
    """
    bits = _check_bits(bits)
    if g not in _VALID_FOR_LAYOUT[m.layout]:
        raise ConfigError(f"{g.name} invalid for {m.layout.name} layout")
    top = (1 << (bits - 1)) - 1
    if g is Granularity.PER_TENSOR:
        maxes = np.array([np.abs(m.data).max()])
    elif g is Granularity.PER_TOKEN:
        maxes = np.abs(m.data).max(axis=1)
    else:
        maxes = np.abs(m.data).max(axis=0)
    scales = (maxes.astype(np.float64) / top).astype(np.float32)
    scales[maxes == 0.0] = np.float32(1.0)

    if g is Granularity.PER_CHANNEL:
        divisor = scales.astype(np.float64)[np.newaxis, :]
    elif g is Granularity.PER_TOKEN:
        divisor = scales.astype(np.float64)[:, np.newaxis]
    else:
        divisor = np.float64(scales[0])
    t = m.data.astype(np.float64) / divisor
    q = np.clip(_round_half_away(t), -top, top).astype(np.int32)
    return QuantizedTensor(q, scales, bits, g)


def _scale_grid(t: QuantizedTensor) -> np.ndarray:
    """Per-element float64 scale, broadcast to the tensor shape."""
    s = t.scales.astype(np.float64)
    if t.granularity is Granularity.PER_TOKEN:
        return np.broadcast_to(s[:, np.newaxis], t.q.shape)
    if t.granularity is Granularity.PER_CHANNEL:
        return np.broadcast_to(s[np.newaxis, :], t.q.shape)
    return np.broadcast_to(s, t.q.shape)


def dequantize(t: QuantizedTensor, layout: Layout = Layout.ACTIVATION) -> DenseMatrix:
    """Map codes back to reals: element (i, j) = q(i, j) * scale of its group."""
    values = t.q.astype(np.float64) * _scale_grid(t)
    return DenseMatrix(values.astype(np.float32), layout)


def fake_quantize(m: DenseMatrix, bits: int, g: Granularity) -> DenseMatrix:
    """Quantize-dequantize round trip; shape and layout preserved."""
    return dequantize(quantize_absmax(m, bits, g), m.layout)


def _gemm_f64(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Reference GEMM: float64 accumulation of float32 operands."""
    return np.matmul(a.astype(np.float64), b.astype(np.float64))


def fp_gemm(x: DenseMatrix, w: DenseMatrix) -> DenseMatrix:
    """Full-precision product of an activation by a weight matrix."""
    if x.cols != w.rows:
        raise ShapeError(f"GEMM shapes {x.rows}x{x.cols} @ {w.rows}x{w.cols}")
    return DenseMatrix(_gemm_f64(x.data, w.data).astype(np.float32), Layout.ACTIVATION)


def _int_gemm_f64(a: QuantizedTensor, w: QuantizedTensor) -> np.ndarray:
    if a.cols != w.rows:
        raise ShapeError(f"GEMM shapes {a.rows}x{a.cols} @ {w.rows}x{w.cols}")
    if a.granularity not in (Granularity.PER_TENSOR, Granularity.PER_TOKEN):
        raise ConfigError(f"activation operand cannot be {a.granularity.name}")
    if w.granularity not in (Granularity.PER_TENSOR, Granularity.PER_CHANNEL):
        raise ConfigError(f"weight operand cannot be {w.granularity.name}")
    # int64 accumulation is exact for 8-bit codes up to k ~ 2^48, and exact
    # integer addition is associative, so the result is identical under any
    # internal parallelism or blocking.
    acc = np.matmul(a.q.astype(np.int64), w.q.astype(np.int64))
    out = acc.astype(np.float64) * a.scales.astype(np.float64).reshape(-1, 1)
    out *= w.scales.astype(np.float64).reshape(1, -1)
    return out


def int_gemm(a: QuantizedTensor, w: QuantizedTensor) -> DenseMatrix:
    """Integer GEMM with exact wide accumulation, then scale multiply.

    output(i, j) = sum_k a.q(i, k) * w.q(k, j), times the activation scale of
    row i, times the weight scale of column j (scales broadcast per
    granularity; per-tensor scales apply to every row/column).
    """
    return DenseMatrix(_int_gemm_f64(a, w).astype(np.float32), Layout.ACTIVATION)
