"""Method configuration shared by the GEMM implementations, CLI, and harnesses.

``MethodConfig`` also defines the JSON schema external tools use to describe
an evaluation cell; infinite bit widths serialize as the string ``"inf"``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import ConfigError
from .quantcore import FP_BITS, Granularity


class Method(enum.Enum):
    FP = "fp"
    NAIVE = "naive"
    MUXQ = "muxq"
    MIXED = "mixed"


def _check_width(bits, name: str):
    if isinstance(bits, float) and math.isinf(bits) and bits > 0:
        return FP_BITS
    if isinstance(bits, (int,)) and not isinstance(bits, bool) and 2 <= bits <= 8:
        return int(bits)
    raise ConfigError(f"{name} must be an integer in [2, 8] or inf, got {bits!r}")


@dataclass(frozen=True)
class MethodConfig:
    """One evaluation cell: method plus bit widths, granularities, and knobs.

    ``theta`` and ``exp_factor`` are ignored by FP and Naive, and
    ``exp_factor`` by Mixed. ``mode`` selects fake quantization
    (quantize-dequantize-compute) or the integer GEMM path.
    """

    method: Method = Method.NAIVE
    act_bits: int | float = 8
    w_bits: int | float = 8
    act_granularity: Granularity = Granularity.PER_TENSOR
    w_granularity: Granularity = Granularity.PER_TENSOR
    theta: float = 6.0
    exp_factor: int = 2
    mode: str = "fake"

    def __post_init__(self):
        if not isinstance(self.method, Method):
            raise ConfigError(f"invalid method: {self.method!r}")
        object.__setattr__(self, "act_bits", _check_width(self.act_bits, "act_bits"))
        object.__setattr__(self, "w_bits", _check_width(self.w_bits, "w_bits"))
        if self.act_granularity not in (Granularity.PER_TENSOR, Granularity.PER_TOKEN):
            raise ConfigError("act_granularity must be per-tensor or per-token")
        if self.w_granularity not in (Granularity.PER_TENSOR, Granularity.PER_CHANNEL):
            raise ConfigError("w_granularity must be per-tensor or per-channel")
        if self.mode not in ("fake", "int"):
            raise ConfigError(f"mode must be 'fake' or 'int', got {self.mode!r}")
        if (
            not isinstance(self.exp_factor, (int,))
            or isinstance(self.exp_factor, bool)
            or not 0 <= self.exp_factor <= 8
        ):
            raise ConfigError(f"exp_factor must be an integer in [0, 8], got {self.exp_factor!r}")
        if self.method in (Method.MUXQ, Method.MIXED) and not self.theta > 0:
            raise ConfigError(f"theta must be > 0, got {self.theta}")
        if self.method is not Method.FP and self.mode == "int":
            if math.isinf(self.act_bits) or math.isinf(self.w_bits):
                raise ConfigError("int mode requires finite act_bits and w_bits")

    def to_json_dict(self) -> dict:
        return {
            "method": self.method.value,
            "act_bits": "inf" if math.isinf(self.act_bits) else self.act_bits,
            "w_bits": "inf" if math.isinf(self.w_bits) else self.w_bits,
            "act_granularity": self.act_granularity.value,
            "w_granularity": self.w_granularity.value,
            "theta": self.theta,
            "exp_factor": self.exp_factor,
            "mode": self.mode,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "MethodConfig":
        def width(v):
            return FP_BITS if v == "inf" else v

        try:
            return cls(
                method=Method(d["method"]),
                act_bits=width(d.get("act_bits", 8)),
                w_bits=width(d.get("w_bits", 8)),
                act_granularity=Granularity(d.get("act_granularity", "tensor")),
                w_granularity=Granularity(d.get("w_granularity", "tensor")),
                theta=float(d.get("theta", 6.0)),
                exp_factor=int(d.get("exp_factor", 2)),
                mode=d.get("mode", "fake"),
            )
        except (KeyError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad method config: {exc}") from exc
