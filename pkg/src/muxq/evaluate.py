"""Single dispatch point from a MethodConfig to the matching GEMM."""

from __future__ import annotations

from .baselines import mixed_precision_gemm, naive_gemm
from .config import Method, MethodConfig
from .decompose import muxq_gemm
from .metrics import ErrorStats, error_stats
from .quantcore import fp_gemm
from .tensorio import DenseMatrix


def run_method(x: DenseMatrix, w: DenseMatrix, cfg: MethodConfig) -> DenseMatrix:
    if cfg.method is Method.FP:
        return fp_gemm(x, w)
    if cfg.method is Method.NAIVE:
        return naive_gemm(x, w, cfg)
    if cfg.method is Method.MUXQ:
        return muxq_gemm(x, w, cfg)
    return mixed_precision_gemm(x, w, cfg)


def compare_to_fp(x: DenseMatrix, w: DenseMatrix, cfg: MethodConfig) -> tuple[DenseMatrix, ErrorStats]:
    """Run the configured method and report its error against the FP product."""
    out = run_method(x, w, cfg)
    return out, error_stats(fp_gemm(x, w), out)
