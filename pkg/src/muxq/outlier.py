"""Channel-wise activation-outlier detection.

A channel counts as an outlier when at least one of its elements has
magnitude strictly greater than the threshold; the conventional threshold
is 6.0. Values exactly equal to the threshold are not outliers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .tensorio import DenseMatrix

DEFAULT_THETA = 6.0


@dataclass(frozen=True)
class OutlierSet:
    """Strictly increasing channel indices plus the threshold that produced them."""

    indices: tuple[int, ...] = field(default_factory=tuple)
    theta: float = DEFAULT_THETA

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        if not self.theta > 0:
            raise ConfigError(f"theta must be > 0, got {self.theta}")
        for a, b in zip(self.indices, self.indices[1:]):
            if a >= b:
                raise ConfigError("outlier indices must be strictly increasing")
        if self.indices and self.indices[0] < 0:
            raise ConfigError("outlier indices must be non-negative")

    def __len__(self) -> int:
        return len(self.indices)


def detect_outlier_channels(x: DenseMatrix, theta: float = DEFAULT_THETA) -> OutlierSet:
    """Return the channels of ``x`` holding any element with |value| > theta."""
    if not theta > 0:
        raise ConfigError(f"theta must be > 0, got {theta}")
    hits = np.nonzero(np.abs(x.data).max(axis=0) > theta)[0]
    return OutlierSet(tuple(int(c) for c in hits), float(theta))
