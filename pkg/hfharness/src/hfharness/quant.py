"""Torch reimplementation of the fake-quantized GEMM methods.

The conventions are pinned to the primary toolkit so the two codebases stay
interchangeable (cross-checked at runtime by ``crosscheck``):

* scales = float32(absmax_float64 / (2^(bits-1)-1)), zero-max groups get 1.0
* codes  = round-half-away-from-zero(x_float64 / scale_float64), clamped to
  the symmetric range
* fake value = float32(code * scale), the product exact in float64
* outlier channel = any |element| strictly greater than theta
* body = outlier columns * 2^-exp_factor; aux = those columns, compacted,
  re-quantized with its own scales; the weight is quantized once and its
  outlier rows gathered afterwards; outputs combine as
  body_out + (2^e - 1) * aux_out
* mixed precision multiplies outlier columns/rows unquantized and quantizes
  the complement with scales computed on the complement alone
"""

from __future__ import annotations

import math

import torch

from .methodcfg import HarnessConfig

_ROUND_HALF_AWAY = "half_away"  # the only supported mode; tests may monkeypatch


def _round_half_away(t: torch.Tensor) -> torch.Tensor:
    if _ROUND_HALF_AWAY == "half_even":  # test hook for drift detection
        return torch.round(t)
    return torch.sign(t) * torch.floor(torch.abs(t) + 0.5)


def _group_scales(x: torch.Tensor, bits: int, per: str) -> torch.Tensor:
    top = (1 << (bits - 1)) - 1
    if per == "tensor":
        maxes = x.abs().amax().reshape(1)
    elif per == "row":
        maxes = x.abs().amax(dim=1)
    else:  # column
        maxes = x.abs().amax(dim=0)
    scales = (maxes.double() / top).float()
    return torch.where(maxes == 0, torch.ones_like(scales), scales)


def fake_quantize(x: torch.Tensor, bits, per: str) -> torch.Tensor:
    """Quantize-dequantize ``x`` (2-D float32) with one scale per group."""
    if isinstance(bits, float) and math.isinf(bits):
        return x
    top = (1 << (bits - 1)) - 1
    scales = _group_scales(x, bits, per)
    if per == "tensor":
        grid = scales.double()
    elif per == "row":
        grid = scales.double().unsqueeze(1)
    else:
        grid = scales.double().unsqueeze(0)
    codes = _round_half_away(x.double() / grid).clamp(-top, top)
    return (codes * grid).float()


def _act_per(cfg: HarnessConfig) -> str:
    return "tensor" if cfg.act_granularity == "tensor" else "row"


def _w_per(cfg: HarnessConfig) -> str:
    return "tensor" if cfg.w_granularity == "tensor" else "column"


def detect_outlier_columns(x: torch.Tensor, theta: float) -> torch.Tensor:
    return torch.nonzero(x.abs().amax(dim=0) > theta, as_tuple=False).flatten()


def _mm(a: torch.Tensor, b: torch.Tensor, accum: torch.dtype) -> torch.Tensor:
    if accum is torch.float64:
        return (a.double() @ b.double()).float()
    return a @ b


def method_output(
    x: torch.Tensor, w: torch.Tensor, cfg: HarnessConfig, accum: torch.dtype = torch.float32
) -> torch.Tensor:
    """One quantized GEMM: ``x`` is (tokens, in), ``w`` is (in, out), float32."""
    if cfg.method == "fp":
        return _mm(x, w, accum)
    if cfg.method == "naive":
        return _mm(fake_quantize(x, cfg.act_bits, _act_per(cfg)),
                   fake_quantize(w, cfg.w_bits, _w_per(cfg)), accum)
    if cfg.method == "muxq":
        return _muxq(x, w, cfg, accum)
    return _mixed(x, w, cfg, accum)


def _muxq(x, w, cfg, accum):
    idx = detect_outlier_columns(x, cfg.theta)
    e = cfg.exp_factor
    factor = (1 << e) - 1
    body = x.clone()
    if idx.numel() and e > 0:
        body[:, idx] = body[:, idx] * (2.0**-e)
    w_q = fake_quantize(w, cfg.w_bits, _w_per(cfg))
    out = _mm(fake_quantize(body, cfg.act_bits, _act_per(cfg)), w_q, accum)
    if idx.numel() and factor > 0:
        aux = body[:, idx].contiguous()
        aux_out = _mm(fake_quantize(aux, cfg.act_bits, _act_per(cfg)), w_q[idx, :], accum)
        out = (out.double() + float(factor) * aux_out.double()).float()
    return out


def _mixed(x, w, cfg, accum):
    idx = detect_outlier_columns(x, cfg.theta)
    if idx.numel() == 0:
        return _mm(fake_quantize(x, cfg.act_bits, _act_per(cfg)),
                   fake_quantize(w, cfg.w_bits, _w_per(cfg)), accum)
    if idx.numel() == x.shape[1]:
        return _mm(x, w, accum)
    keep = torch.ones(x.shape[1], dtype=torch.bool, device=x.device)
    keep[idx] = False
    fp_part = _mm(x[:, idx], w[idx, :], torch.float64).double()
    quant = _mm(
        fake_quantize(x[:, keep].contiguous(), cfg.act_bits, _act_per(cfg)),
        fake_quantize(w[keep, :].contiguous(), cfg.w_bits, _w_per(cfg)),
        accum,
    )
    return (fp_part + quant.double()).float()
