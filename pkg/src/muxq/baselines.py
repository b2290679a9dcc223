"""Comparison GEMMs: naive uniform quantization and mixed-precision decomposition.

Both paths share one operand-preparation helper so that the degeneracy
contracts (no outliers, infinite bits) reduce to bit-identical computations.
"""

from __future__ import annotations

import math

import numpy as np

from .config import Method, MethodConfig
from .errors import ConfigError, ShapeError
from .outlier import detect_outlier_channels
from .quantcore import (
    Granularity,
    QuantizedTensor,
    _gemm_f64,
    _int_gemm_f64,
    fake_quantize,
    quantize_absmax,
)
from .tensorio import DenseMatrix, Layout


def _prepare(m: DenseMatrix, bits, g: Granularity, mode: str):
    """Materialize one GEMM operand: raw (inf bits), fake-quantized, or integer."""
    if isinstance(bits, float) and math.isinf(bits):
        if mode == "int":
            raise ConfigError("int mode requires finite bit widths")
        return m
    if mode == "fake":
        return fake_quantize(m, bits, g)
    return quantize_absmax(m, bits, g)


def _pair_gemm_f64(a_op, w_op) -> np.ndarray:
    if isinstance(a_op, QuantizedTensor) != isinstance(w_op, QuantizedTensor):
        raise ConfigError("integer GEMM needs both operands quantized")
    if isinstance(a_op, QuantizedTensor):
        return _int_gemm_f64(a_op, w_op)
    return _gemm_f64(a_op.data, w_op.data)


def _gather_weight_rows(w_op, idx: np.ndarray):
    """Row-gather a prepared weight operand, keeping the scales already computed.

    Per-tensor and per-channel scales are row-independent, so gathering after
    quantization is exactly the zero-padded full-shape product.
    """
    if isinstance(w_op, QuantizedTensor):
        return QuantizedTensor(w_op.q[idx, :], w_op.scales, w_op.bits, w_op.granularity)
    return DenseMatrix(w_op.data[idx, :], Layout.WEIGHT)


def _config_gemm_f64(x: DenseMatrix, w: DenseMatrix, cfg: MethodConfig) -> np.ndarray:
    a_op = _prepare(x, cfg.act_bits, cfg.act_granularity, cfg.mode)
    w_op = _prepare(w, cfg.w_bits, cfg.w_granularity, cfg.mode)
    return _pair_gemm_f64(a_op, w_op)


def _check_shapes(x: DenseMatrix, w: DenseMatrix):
    if x.layout is not Layout.ACTIVATION or w.layout is not Layout.WEIGHT:
        raise ConfigError("expected activation @ weight layouts")
    if x.cols != w.rows:
        raise ShapeError(f"GEMM shapes {x.rows}x{x.cols} @ {w.rows}x{w.cols}")


def naive_gemm(x: DenseMatrix, w: DenseMatrix, cfg: MethodConfig) -> DenseMatrix:
    """Quantize both operands at the configured widths, multiply, return reals."""
    _check_shapes(x, w)
    return DenseMatrix(_config_gemm_f64(x, w, cfg).astype(np.float32), Layout.ACTIVATION)


def mixed_precision_gemm(x: DenseMatrix, w: DenseMatrix, cfg: MethodConfig) -> DenseMatrix:
    """Outlier channels in full precision, the rest quantized, outputs summed.

    Outlier columns of ``x`` and the matching rows of ``w`` are multiplied
    unquantized; the complements are quantized at the configured widths with
    scales computed on the complements alone. With no outliers this is
    bit-identical to ``naive_gemm``; with every channel an outlier it is the
    plain full-precision product.
    """
    _check_shapes(x, w)
    outliers = detect_outlier_channels(x, cfg.theta)
    if len(outliers) == 0:
        return naive_gemm(x, w, cfg)
    idx = np.asarray(outliers.indices, dtype=np.intp)
    if len(outliers) == x.cols:
        return DenseMatrix(_gemm_f64(x.data, w.data).astype(np.float32), Layout.ACTIVATION)
    keep = np.setdiff1d(np.arange(x.cols, dtype=np.intp), idx)
    fp_part = _gemm_f64(x.data[:, idx], w.data[idx, :])
    x_rest = DenseMatrix(x.data[:, keep], Layout.ACTIVATION)
    w_rest = DenseMatrix(w.data[keep, :], Layout.WEIGHT)
    quant_part = _config_gemm_f64(x_rest, w_rest, cfg)
    return DenseMatrix((fp_part + quant_part).astype(np.float32), Layout.ACTIVATION)
