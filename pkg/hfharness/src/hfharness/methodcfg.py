"""Method configuration mirroring the muxq CLI's JSON schema.

Field names, value vocabulary, and the "inf" bit-width sentinel match the
primary toolkit exactly so configs can round-trip between the two tools.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

METHODS = ("fp", "naive", "muxq", "mixed")
ACT_GRANULARITIES = ("tensor", "token")
W_GRANULARITIES = ("tensor", "channel")
TARGETS = ("attn_in", "attn_out", "mlp_in", "mlp_out")


@dataclass(frozen=True)
class HarnessConfig:
    method: str = "naive"
    act_bits: int | float = 8
    w_bits: int | float = 8
    act_granularity: str = "tensor"
    w_granularity: str = "tensor"
    theta: float = 6.0
    exp_factor: int = 2
    mode: str = "fake"
    targets: tuple[str, ...] = field(default_factory=lambda: TARGETS)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        for name, bits in (("act_bits", self.act_bits), ("w_bits", self.w_bits)):
            ok = (isinstance(bits, float) and math.isinf(bits) and bits > 0) or (
                isinstance(bits, int) and not isinstance(bits, bool) and 2 <= bits <= 8
            )
            if not ok:
                raise ValueError(f"{name} must be in [2, 8] or inf, got {bits!r}")
        if self.act_granularity not in ACT_GRANULARITIES:
            raise ValueError(f"act_granularity must be one of {ACT_GRANULARITIES}")
        if self.w_granularity not in W_GRANULARITIES:
            raise ValueError(f"w_granularity must be one of {W_GRANULARITIES}")
        if self.method in ("muxq", "mixed") and not self.theta > 0:
            raise ValueError("theta must be > 0")
        if not 0 <= self.exp_factor <= 8:
            raise ValueError("exp_factor must be in [0, 8]")
        if self.mode != "fake":
            raise ValueError("the harness evaluates fake quantization only")
        object.__setattr__(self, "targets", tuple(self.targets))
        for t in self.targets:
            if t not in TARGETS:
                raise ValueError(f"unknown target {t!r}")

    def to_json_dict(self) -> dict:
        return {
            "method": self.method,
            "act_bits": "inf" if math.isinf(self.act_bits) else self.act_bits,
            "w_bits": "inf" if math.isinf(self.w_bits) else self.w_bits,
            "act_granularity": self.act_granularity,
            "w_granularity": self.w_granularity,
            "theta": self.theta,
            "exp_factor": self.exp_factor,
            "mode": self.mode,
            "targets": list(self.targets),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "HarnessConfig":
        def width(v):
            return math.inf if v == "inf" else v

        return cls(
            method=d.get("method", "naive"),
            act_bits=width(d.get("act_bits", 8)),
            w_bits=width(d.get("w_bits", 8)),
            act_granularity=d.get("act_granularity", "tensor"),
            w_granularity=d.get("w_granularity", "tensor"),
            theta=float(d.get("theta", 6.0)),
            exp_factor=int(d.get("exp_factor", 2)),
            mode=d.get("mode", "fake"),
            targets=tuple(d.get("targets", TARGETS)),
        )
