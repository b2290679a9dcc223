"""Capture pre-projection activations into MUXT files.

One file per (layer, target), named ``layer{i:02d}_{target}.muxt``, holding
the flattened (tokens, features) input seen by that projection over the
evaluation batch. Files are activation-layout and readable by the primary
CLI's eval/profile commands.
"""

from __future__ import annotations

import os

import numpy as np
import torch

from .muxt import LAYOUT_ACTIVATION, write_muxt
from .patching import _target_modules


def dump_activations(model, token_ids: np.ndarray, out_dir, targets, layers=None, seq_len=512):
    """Run the batch through the model and write one dump per (layer, target).

    Returns the list of written paths. ``token_ids`` is split into
    ``seq_len``-sized rows; a trailing remainder shorter than 2 tokens is
    dropped.
    """
    os.makedirs(out_dir, exist_ok=True)
    blocks = model.transformer.h
    chosen = list(range(len(blocks))) if layers is None else list(layers)
    captured = {(i, t): [] for i in chosen for t in targets}
    hooks = []

    def make_hook(key):
        def hook(module, args, output):
            x = args[0].detach()
            captured[key].append(x.reshape(-1, x.shape[-1]).to(torch.float32).cpu().numpy())

        return hook

    for i in chosen:
        for target in targets:
            parent, attr = _target_modules(blocks[i], target)
            hooks.append(getattr(parent, attr).register_forward_hook(make_hook((i, target))))
    try:
        with torch.no_grad():
            for start in range(0, len(token_ids), seq_len):
                chunk = token_ids[start : start + seq_len]
                if len(chunk) < 2:
                    break
                ids = torch.from_numpy(np.asarray(chunk, dtype=np.int64)).unsqueeze(0)
                model(ids)
    finally:
        for h in hooks:
            h.remove()

    paths = []
    for (i, target), parts in captured.items():
        path = os.path.join(out_dir, f"layer{i:02d}_{target}.muxt")
        write_muxt(path, np.concatenate(parts, axis=0), LAYOUT_ACTIVATION)
        paths.append(path)
    return sorted(paths)
