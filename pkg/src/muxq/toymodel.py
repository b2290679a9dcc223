"""Forward-only byte-level decoder with seeded weights and planted outliers.

A tiny pre-LN transformer (GELU MLP, causal attention, learned absolute
positions) whose weights come from the same Philox generator the synthetic
matrices use, so two builds from one config produce identical logits.

Channel-concentrated activation outliers are planted by multiplying the
chosen entries of every block's layer-norm gain by ``outlier_gain``: the
norm output feeds the attention and MLP input projections directly, so those
projections see activations whose magnitude is concentrated in the planted
channels, and quantized-GEMM methods can be compared end to end on logits.

The four projection kinds that can be routed through a quantized GEMM are
named ``attn_in`` (the fused qkv projection), ``attn_out`` (the attention
output projection), ``mlp_in``, and ``mlp_out``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from importlib import resources

import numpy as np

from .config import Method, MethodConfig
from .errors import ConfigError
from .evaluate import run_method
from .quantcore import _gemm_f64, fp_gemm
from .tensorio import DenseMatrix, Layout

TARGET_NAMES = ("attn_in", "attn_out", "mlp_in", "mlp_out")

_LN_EPS = 1e-5
_GELU_SQRT_2_OVER_PI = 0.7978845608028654  # sqrt(2/pi), fixed for ports
_GELU_CUBIC = 0.044715


@dataclass(frozen=True)
class ToyConfig:
    n_layers: int = 2
    d_model: int = 64
    n_heads: int = 4
    d_ff: int = 256
    vocab: int = 256  # byte-level
    seq_len: int = 128
    seed: int = 0
    outlier_channels: tuple[int, ...] = field(default_factory=tuple)
    outlier_gain: float = 20.0

    def __post_init__(self):
        object.__setattr__(self, "outlier_channels", tuple(self.outlier_channels))
        if self.n_layers < 1 or self.d_model < 1 or self.d_ff < 1:
            raise ConfigError("layer and width counts must be >= 1")
        if self.d_model % self.n_heads != 0:
            raise ConfigError(f"d_model {self.d_model} not divisible by n_heads {self.n_heads}")
        if not 1 <= self.seq_len <= 128:
            raise ConfigError(f"seq_len must be in [1, 128], got {self.seq_len}")
        if self.vocab < 2:
            raise ConfigError("vocab must be >= 2")
        if not self.outlier_gain > 0:
            raise ConfigError(f"outlier_gain must be > 0, got {self.outlier_gain}")
        for c in self.outlier_channels:
            if not 0 <= c < self.d_model:
                raise ConfigError(f"outlier channel {c} outside [0, {self.d_model})")


@dataclass(frozen=True)
class QuantTargetSet:
    """Which of the four projection kinds get the quantized GEMM."""

    attn_in: bool = True
    attn_out: bool = True
    mlp_in: bool = True
    mlp_out: bool = True

    @classmethod
    def from_names(cls, names) -> "QuantTargetSet":
        names = tuple(names)
        for n in names:
            if n not in TARGET_NAMES:
                raise ConfigError(f"unknown quant target {n!r}")
        return cls(**{t: t in names for t in TARGET_NAMES})

    def enabled(self, name: str) -> bool:
        return bool(getattr(self, name))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(t for t in TARGET_NAMES if getattr(self, t))

    def __post_init__(self):
        for f in fields(self):
            if not isinstance(getattr(self, f.name), bool):
                raise ConfigError(f"target flag {f.name} must be a bool")


@dataclass(frozen=True)
class ToyModel:
    cfg: ToyConfig
    wte: np.ndarray  # (vocab, d_model)
    wpe: np.ndarray  # (seq_len, d_model)
    blocks: tuple[dict, ...]
    ln_f_gain: np.ndarray
    ln_f_bias: np.ndarray
    head: np.ndarray  # (d_model, vocab)


def build_toy(cfg: ToyConfig) -> ToyModel:
    """Draw all weights from Philox(cfg.seed) and plant the LN-gain outliers.

    Draw order (fixed so the model is reproducible): token embedding,
    positional embedding, then per block the attn_in / attn_out / mlp_in /
    mlp_out weights, then the output head. Layer-norm gains start at one and
    get the planted channels multiplied by ``outlier_gain``; biases are zero.
    """
    rng = np.random.Generator(np.random.Philox(key=cfg.seed))

    def draw(shape, std):
        return rng.standard_normal(shape, dtype=np.float32) * np.float32(std)

    d, dff = cfg.d_model, cfg.d_ff
    wte = draw((cfg.vocab, d), 0.02)
    wpe = draw((cfg.seq_len, d), 0.02)
    gain = np.ones(d, dtype=np.float32)
    if cfg.outlier_channels:
        gain[list(cfg.outlier_channels)] = np.float32(cfg.outlier_gain)
    blocks = []
    for _ in range(cfg.n_layers):
        blocks.append(
            {
                "ln1_gain": gain.copy(),
                "ln1_bias": np.zeros(d, dtype=np.float32),
                "attn_in": DenseMatrix(draw((d, 3 * d), 1.0 / math.sqrt(d)), Layout.WEIGHT),
                "attn_out": DenseMatrix(draw((d, d), 1.0 / math.sqrt(d)), Layout.WEIGHT),
                "ln2_gain": gain.copy(),
                "ln2_bias": np.zeros(d, dtype=np.float32),
                "mlp_in": DenseMatrix(draw((d, dff), 1.0 / math.sqrt(d)), Layout.WEIGHT),
                "mlp_out": DenseMatrix(draw((dff, d), 1.0 / math.sqrt(dff)), Layout.WEIGHT),
            }
        )
    head = draw((d, cfg.vocab), 1.0 / math.sqrt(d))
    return ToyModel(
        cfg=cfg,
        wte=wte,
        wpe=wpe,
        blocks=tuple(blocks),
        ln_f_gain=np.ones(d, dtype=np.float32),
        ln_f_bias=np.zeros(d, dtype=np.float32),
        head=head,
    )


def _layer_norm(x: np.ndarray, gain: np.ndarray, bias: np.ndarray) -> np.ndarray:
    x64 = x.astype(np.float64)
    mu = x64.mean(axis=-1, keepdims=True)
    var = x64.var(axis=-1, keepdims=True)
    norm = ((x64 - mu) / np.sqrt(var + _LN_EPS)).astype(np.float32)
    # gain applied in float32 so planting scales each channel exactly
    return norm * gain + bias


def _gelu_tanh(x: np.ndarray) -> np.ndarray:
    x64 = x.astype(np.float64)
    inner = _GELU_SQRT_2_OVER_PI * (x64 + _GELU_CUBIC * x64**3)
    return (0.5 * x64 * (1.0 + np.tanh(inner))).astype(np.float32)


def _softmax32(scores: np.ndarray) -> np.ndarray:
    # 32-bit softmax with max subtraction; masked slots arrive as -inf.
    m = scores.max(axis=-1, keepdims=True)
    e = np.exp(scores - m)
    return e / e.sum(axis=-1, keepdims=True)


def _check_tokens(model: ToyModel, tokens: np.ndarray) -> np.ndarray:
    tokens = np.asarray(tokens)
    if tokens.ndim != 1 or tokens.size < 1:
        raise ConfigError("tokens must be a non-empty 1-D sequence")
    if tokens.size > model.cfg.seq_len:
        raise ConfigError(f"sequence length {tokens.size} exceeds {model.cfg.seq_len}")
    if tokens.min() < 0 or tokens.max() >= model.cfg.vocab:
        raise ConfigError("token id out of range")
    return tokens.astype(np.intp)


def _forward(model: ToyModel, tokens: np.ndarray, project) -> np.ndarray:
    """Shared forward pass; ``project(name, layer, x2d, weight)`` does each GEMM."""
    cfg = model.cfg
    tokens = _check_tokens(model, tokens)
    T, d = tokens.size, cfg.d_model
    d_head = d // cfg.n_heads
    mask = np.triu(np.full((T, T), -np.inf, dtype=np.float32), k=1)

    x = model.wte[tokens] + model.wpe[:T]
    for layer, blk in enumerate(model.blocks):
        h = _layer_norm(x, blk["ln1_gain"], blk["ln1_bias"])
        qkv = project("attn_in", layer, h, blk["attn_in"])
        q, k, v = (
            a.reshape(T, cfg.n_heads, d_head).transpose(1, 0, 2) for a in np.split(qkv, 3, axis=1)
        )
        scores = np.matmul(q.astype(np.float64), k.transpose(0, 2, 1).astype(np.float64))
        scores = (scores / math.sqrt(d_head)).astype(np.float32) + mask
        probs = _softmax32(scores)
        ctx = np.matmul(probs.astype(np.float64), v.astype(np.float64)).astype(np.float32)
        ctx = ctx.transpose(1, 0, 2).reshape(T, d)
        x = x + project("attn_out", layer, ctx, blk["attn_out"])

        h = _layer_norm(x, blk["ln2_gain"], blk["ln2_bias"])
        u = project("mlp_in", layer, h, blk["mlp_in"])
        x = x + project("mlp_out", layer, _gelu_tanh(u), blk["mlp_out"])

    x = _layer_norm(x, model.ln_f_gain, model.ln_f_bias)
    return _gemm_f64(x, model.head).astype(np.float32)


def _fp_project(name, layer, x2d, weight):
    return fp_gemm(DenseMatrix(x2d, Layout.ACTIVATION), weight).data


def forward_fp(model: ToyModel, tokens) -> np.ndarray:
    """Reference full-precision forward; returns (len(tokens), vocab) logits."""
    return _forward(model, tokens, _fp_project)


def forward_quantized(
    model: ToyModel, tokens, method_cfg: MethodConfig, targets: QuantTargetSet
) -> np.ndarray:
    """Forward with the flagged projections routed through ``method_cfg``.

    FP method reproduces ``forward_fp`` bit-exactly (same code path).
    """
    if method_cfg.method is Method.FP:
        return _forward(model, tokens, _fp_project)
    if not targets.names:
        raise ConfigError("quantized forward needs at least one target flag set")

    def project(name, layer, x2d, weight):
        x = DenseMatrix(x2d, Layout.ACTIVATION)
        if targets.enabled(name):
            return run_method(x, weight, method_cfg).data
        return fp_gemm(x, weight).data

    return _forward(model, tokens, project)


def capture_activations(model: ToyModel, tokens, target: str, layer: int = 0) -> DenseMatrix:
    """Pre-projection input of ``target`` at ``layer`` during the FP forward."""
    if target not in TARGET_NAMES:
        raise ConfigError(f"unknown quant target {target!r}")
    if not 0 <= layer < model.cfg.n_layers:
        raise ConfigError(f"layer {layer} outside [0, {model.cfg.n_layers})")
    captured = {}

    def project(name, lyr, x2d, weight):
        if name == target and lyr == layer:
            captured["x"] = x2d.copy()
        return _fp_project(name, lyr, x2d, weight)

    _forward(model, tokens, project)
    return DenseMatrix(captured["x"], Layout.ACTIVATION)


def load_corpus() -> np.ndarray:
    """Bundled 4096-byte ASCII corpus as uint8 token ids."""
    raw = resources.files("muxq").joinpath("data/corpus.txt").read_bytes()
    return np.frombuffer(raw, dtype=np.uint8)


def corpus_logits(
    model: ToyModel, tokens: np.ndarray, method_cfg: MethodConfig, targets: QuantTargetSet
) -> np.ndarray:
    """Concatenated logits over consecutive seq_len-sized chunks of ``tokens``."""
    n = model.cfg.seq_len
    chunks = [tokens[i : i + n] for i in range(0, len(tokens), n)]
    outs = [forward_quantized(model, c, method_cfg, targets) for c in chunks if len(c)]
    return np.concatenate(outs, axis=0)
