"""Error metrics against full-precision references, and channel statistics.

All reductions run in float64 with numpy's deterministic pairwise summation.
SQNR is reported in dB over whole tensors; a zero-error comparison maps to
+inf, which serializes as the string ``"inf"``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ShapeError
from .tensorio import DenseMatrix, Layout


@dataclass(frozen=True)
class ErrorStats:
    rel_frobenius: float
    max_abs_err: float
    sqnr_db: float
    mean_kl: float | None = None  # logit comparisons only
    top1_agreement: float | None = None

    def to_json_dict(self) -> dict:
        out = {}
        for key, val in self.__dict__.items():
            if val is None:
                continue
            out[key] = json_number(val)
        return out


def json_number(v: float):
    """Finite floats pass through; infinities become 'inf'/'-inf' sentinels."""
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return float(v)


def error_stats(reference: DenseMatrix, candidate: DenseMatrix) -> ErrorStats:
    """Relative Frobenius error, max absolute error, and SQNR of ``candidate``."""
    if reference.data.shape != candidate.data.shape:
        raise ShapeError(
            f"shape mismatch: {reference.data.shape} vs {candidate.data.shape}"
        )
    ref = reference.data.astype(np.float64)
    diff = ref - candidate.data.astype(np.float64)
    err_power = float(np.sum(diff * diff))
    sig_power = float(np.sum(ref * ref))
    max_abs = float(np.max(np.abs(diff)))
    if err_power == 0.0:
        rel = 0.0  # covers the 0/0 convention
        sqnr = math.inf
    elif sig_power == 0.0:
        rel = math.inf
        sqnr = -math.inf
    else:
        rel = math.sqrt(err_power) / math.sqrt(sig_power)
        sqnr = 10.0 * math.log10(sig_power / err_power)
    return ErrorStats(rel_frobenius=rel, max_abs_err=max_abs, sqnr_db=sqnr)


def channel_max_profile(x: DenseMatrix) -> np.ndarray:
    """Per-channel max |value| of an activation matrix (length = cols)."""
    if x.layout is not Layout.ACTIVATION:
        raise ConfigError("channel profile is defined for activation layout")
    return np.abs(x.data).max(axis=0)


def profile_to_csv(profile: np.ndarray) -> str:
    """Render a channel profile as CSV with header ``channel,max_abs``."""
    lines = ["channel,max_abs"]
    for c, v in enumerate(profile):
        lines.append(f"{c},{np.format_float_positional(np.float32(v), unique=True)}")
    return "\n".join(lines) + "\n"


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits.astype(np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    return z - np.log(np.sum(np.exp(z), axis=-1, keepdims=True))


def mean_kl(ref_logits: np.ndarray, cand_logits: np.ndarray) -> float:
    """Mean KL(softmax(ref) || softmax(cand)) over rows, natural log."""
    if ref_logits.shape != cand_logits.shape:
        raise ShapeError(f"logit shapes {ref_logits.shape} vs {cand_logits.shape}")
    log_p = _log_softmax(ref_logits)
    log_q = _log_softmax(cand_logits)
    kl_rows = np.sum(np.exp(log_p) * (log_p - log_q), axis=-1)
    return float(np.mean(kl_rows))


def top1_agreement(ref_logits: np.ndarray, cand_logits: np.ndarray) -> float:
    """Fraction of rows whose argmax matches the reference."""
    if ref_logits.shape != cand_logits.shape:
        raise ShapeError(f"logit shapes {ref_logits.shape} vs {cand_logits.shape}")
    return float(np.mean(np.argmax(ref_logits, axis=-1) == np.argmax(cand_logits, axis=-1)))
