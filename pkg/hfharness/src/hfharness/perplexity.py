"""Sliding-window language-modeling perplexity under fake quantization.

Protocol (fixed, since published table values rarely state their windowing):
the token stream is scored with windows of ``window`` tokens advanced by
``stride``; within each window only the positions not already scored by the
previous window contribute label losses, the rest acting as context. With
stride < window every token past the very first is scored exactly once; at
stride == window each later window's first token has no in-window context
and is skipped. Perplexity = exp(total NLL / scored tokens).
"""

from __future__ import annotations

import time

import numpy as np
import torch
from torch.nn import functional as F

from .methodcfg import HarnessConfig
from .patching import patch_model


def sliding_window_nll(model, token_ids: np.ndarray, window: int = 1024, stride: int = 512):
    """Total token NLL and count over the stream; deterministic given inputs."""
    ids = torch.from_numpy(np.asarray(token_ids, dtype=np.int64))
    n = ids.numel()
    if n < 2:
        raise ValueError("need at least two tokens to score")
    total_nll = 0.0
    total_tokens = 0
    prev_end = 0
    with torch.no_grad():
        for begin in range(0, n, stride):
            end = min(begin + window, n)
            ctx = ids[begin:end].unsqueeze(0)
            # score only positions not already scored by the previous window
            new = end - max(prev_end, begin + 1)
            if new <= 0:
                if end == n:
                    break
                continue
            logits = model(ctx).logits[0]
            logp = F.log_softmax(logits[:-1].double(), dim=-1)
            labels = ctx[0, 1:]
            nll = -logp[torch.arange(labels.numel()), labels]
            total_nll += float(nll[-new:].sum())
            total_tokens += new
            prev_end = end
            if end == n:
                break
    return total_nll, total_tokens


def eval_perplexity(
    model, token_ids: np.ndarray, cfg: HarnessConfig, window: int = 1024, stride: int = 512
) -> dict:
    """Patch the model per ``cfg`` (unless FP), score the stream, report JSON."""
    started = time.perf_counter()
    if cfg.method != "fp":
        patch_model(model, cfg)
    nll, count = sliding_window_nll(model, token_ids, window=window, stride=stride)
    ppl = float(np.exp(nll / count))
    return {
        "config": {**cfg.to_json_dict(), "window": window, "stride": stride},
        "perplexity": ppl,
        "scored_tokens": count,
        "wall_time_ms": (time.perf_counter() - started) * 1000.0,
        "tool_version": "0.1.0",
    }
