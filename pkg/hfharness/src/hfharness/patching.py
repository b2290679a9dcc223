"""Swap GPT-2's projection Conv1D modules for fake-quantized equivalents.

The four projection kinds map onto the Hugging Face GPT-2 module tree as

    attn_in  -> transformer.h[i].attn.c_attn
    attn_out -> transformer.h[i].attn.c_proj
    mlp_in   -> transformer.h[i].mlp.c_fc
    mlp_out  -> transformer.h[i].mlp.c_proj

Conv1D already stores its weight as (in_features, out_features), matching
the harness's GEMM convention. The bias is added after the quantized
multiply, in full precision.
"""

from __future__ import annotations

import torch
from torch import nn
from transformers.pytorch_utils import Conv1D

from .methodcfg import HarnessConfig
from .quant import method_output


class FakeQuantConv1D(nn.Module):
    def __init__(self, conv: Conv1D, cfg: HarnessConfig):
        super().__init__()
        self.nf = conv.nf
        self.weight = conv.weight
        self.bias = conv.bias
        self.cfg = cfg

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        size_out = x.size()[:-1] + (self.nf,)
        flat = x.reshape(-1, x.size(-1))
        out = method_output(flat, self.weight, self.cfg)
        out = out + self.bias
        return out.view(size_out)


def _target_modules(block, target: str):
    return {
        "attn_in": (block.attn, "c_attn"),
        "attn_out": (block.attn, "c_proj"),
        "mlp_in": (block.mlp, "c_fc"),
        "mlp_out": (block.mlp, "c_proj"),
    }[target]


def patch_model(model, cfg: HarnessConfig, layers=None) -> int:
    """Replace the configured projections in-place; returns the patch count."""
    blocks = model.transformer.h
    chosen = range(len(blocks)) if layers is None else layers
    count = 0
    for i in chosen:
        for target in cfg.targets:
            parent, attr = _target_modules(blocks[i], target)
            module = getattr(parent, attr)
            if isinstance(module, FakeQuantConv1D):
                module = Conv1D(module.nf, module.weight.shape[0])  # defensive; not expected
            setattr(parent, attr, FakeQuantConv1D(module, cfg))
            count += 1
    return count


def unpatch_model(model) -> int:
    """Restore original Conv1D modules (weights are shared, not copied)."""
    count = 0
    for block in model.transformer.h:
        for target in ("attn_in", "attn_out", "mlp_in", "mlp_out"):
            parent, attr = _target_modules(block, target)
            module = getattr(parent, attr)
            if isinstance(module, FakeQuantConv1D):
                conv = Conv1D(module.nf, module.weight.shape[0])
                conv.weight = module.weight
                conv.bias = module.bias
                setattr(parent, attr, conv)
                count += 1
    return count
