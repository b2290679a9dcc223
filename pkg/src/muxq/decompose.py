"""Exponent-shift outlier decomposition and the two-GEMM forward path.

An activation matrix X with outlier channel set O and exp factor e splits into

    Body = X with columns in O multiplied by 2^-e   (exact exponent decrement)
    Aux  = the columns of Body indexed by O, compacted to rows x |O|

so that each outlier column reconstructs as Body_col + (2^e - 1) * Aux_col.
Scaling outlier columns down by 2^-e shrinks the abs-max quantization scale
of the main matrix; the auxiliary path restores the lost magnitude after the
matrix multiply:

    Y = quantgemm(Body, W) + (2^e - 1) * quantgemm(Aux, W[O, :])

Aux only ever multiplies the |O| weight rows its columns line up with, which
is identical to the zero-padded full-shape product because W's scales are
computed once, before the row gather.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .baselines import _check_shapes, _gather_weight_rows, _pair_gemm_f64, _prepare
from .config import MethodConfig
from .errors import ConfigError
from .outlier import OutlierSet, detect_outlier_channels
from .tensorio import DenseMatrix, Layout

MAX_EXP_FACTOR = 8


@dataclass(frozen=True)
class MuxqDecomposition:
    """Body matrix, compacted aux columns, their channel indices, and the shift."""

    body: DenseMatrix
    aux: DenseMatrix | None  # None when the outlier set is empty
    outliers: OutlierSet
    exp_factor: int

    def __post_init__(self):
        k = len(self.outliers)
        if k == 0 and self.aux is not None:
            raise ConfigError("aux must be None for an empty outlier set")
        if k > 0 and (self.aux is None or self.aux.data.shape != (self.body.rows, k)):
            raise ConfigError("aux must hold one column per outlier channel")


def _check_exp_factor(e) -> int:
    if not isinstance(e, (int, np.integer)) or isinstance(e, bool) or not 0 <= e <= MAX_EXP_FACTOR:
        raise ConfigError(f"exp factor must be an integer in [0, {MAX_EXP_FACTOR}], got {e!r}")
    return int(e)


def decompose(x: DenseMatrix, outliers: OutlierSet, e: int) -> MuxqDecomposition:
    """Split ``x`` into Body and Aux at exponent shift ``e``.

    Non-outlier columns of Body equal the source columns exactly; outlier
    columns are multiplied by 2^-e, which only decrements the float32
    exponent and loses nothing for normal-range inputs. With e = 0 the Body
    is ``x`` bit for bit.
    """
    e = _check_exp_factor(e)
    for c in outliers.indices:
        if c >= x.cols:
            raise ConfigError(f"outlier channel {c} outside [0, {x.cols})")
    body = x.data.copy()
    aux = None
    if len(outliers) > 0:
        idx = np.asarray(outliers.indices, dtype=np.intp)
        if e > 0:
            body[:, idx] *= np.float32(2.0**-e)
        aux = DenseMatrix(body[:, idx].copy(), Layout.ACTIVATION)
    return MuxqDecomposition(DenseMatrix(body, x.layout), aux, outliers, e)


def reconstruct(d: MuxqDecomposition) -> DenseMatrix:
    """Rebuild the source: outlier columns become body + (2^e - 1) * aux.

    Evaluated in float32. Exact for e <= 1 (the aux term is absent or the
    sum is a power-of-two doubling); for larger e the single multiply-add
    stays within 2 ulp of the source per element.
    """
    out = d.body.data.copy()
    factor = (1 << d.exp_factor) - 1
    if len(d.outliers) > 0 and factor > 0:
        idx = np.asarray(d.outliers.indices, dtype=np.intp)
        out[:, idx] = d.body.data[:, idx] + np.float32(factor) * d.aux.data
    return DenseMatrix(out, d.body.layout)


def muxq_gemm(x: DenseMatrix, w: DenseMatrix, cfg: MethodConfig) -> DenseMatrix:
    """Quantized product via the Body/Aux split.

    Steps: detect outlier channels at ``cfg.theta``; decompose at
    ``cfg.exp_factor``; quantize Body and W at the configured widths and Aux
    independently with its own scales; multiply Body against W and Aux
    against the gathered outlier rows of the already-quantized W; combine as
    Y_body + (2^e - 1) * Y_aux in real arithmetic.

    With no detected outliers, or with e = 0, the aux term vanishes and the
    result is bit-identical to ``naive_gemm`` under the same config.
    """
    _check_shapes(x, w)
    e = _check_exp_factor(cfg.exp_factor)
    outliers = detect_outlier_channels(x, cfg.theta)
    d = decompose(x, outliers, e)
    w_op = _prepare(w, cfg.w_bits, cfg.w_granularity, cfg.mode)
    body_op = _prepare(d.body, cfg.act_bits, cfg.act_granularity, cfg.mode)
    total = _pair_gemm_f64(body_op, w_op)
    factor = (1 << e) - 1
    if len(outliers) > 0 and factor > 0:
        idx = np.asarray(outliers.indices, dtype=np.intp)
        aux_op = _prepare(d.aux, cfg.act_bits, cfg.act_granularity, cfg.mode)
        aux_out = _pair_gemm_f64(aux_op, _gather_weight_rows(w_op, idx))
        total = total + np.float64(factor) * aux_out
    return DenseMatrix(total.astype(np.float32), Layout.ACTIVATION)
