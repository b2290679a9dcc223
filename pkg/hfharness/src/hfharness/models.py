"""Model and token-stream loading, with an offline fallback.

``load_model`` accepts a Hugging Face name or local checkpoint directory;
``random_model`` builds an untrained GPT-2 from config (no network) so the
dump/patch/crosscheck machinery can run in sandboxes. Token streams come
from a tokenizer plus text file, or from a seeded synthetic stream.
"""

from __future__ import annotations

import numpy as np
import torch
from transformers import GPT2Config, GPT2LMHeadModel


def load_model(name_or_path: str):
    model = GPT2LMHeadModel.from_pretrained(name_or_path)
    model.eval()
    return model


def random_model(seed: int = 0, n_layer: int = 12, n_embd: int = 768, n_head: int = 12):
    torch.manual_seed(seed)
    cfg = GPT2Config(n_layer=n_layer, n_embd=n_embd, n_head=n_head)
    model = GPT2LMHeadModel(cfg)
    model.eval()
    return model


def synthetic_tokens(n: int, vocab: int, seed: int = 0) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(key=seed))
    return rng.integers(0, vocab, size=n, dtype=np.int64)


def tokens_from_text(model_name_or_path: str, text_path: str, max_tokens=None) -> np.ndarray:
    from transformers import AutoTokenizer

    tokenizer = AutoTokenizer.from_pretrained(model_name_or_path)
    with open(text_path, "r", encoding="utf-8") as fh:
        text = fh.read()
    ids = tokenizer(text, return_tensors="np")["input_ids"][0]
    if max_tokens is not None:
        ids = ids[:max_tokens]
    return ids.astype(np.int64)
