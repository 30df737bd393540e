"""Maxion-Townsend detection cost: 6 × false-positive rate + (100 − hit ratio)."""
from __future__ import annotations

import math
from dataclasses import dataclass

from metrics.errors import OutOfRangePercent

FALSE_POSITIVE_WEIGHT = 6


@dataclass(frozen=True)
class DetectionStats:
    false_positive_rate: float     # percent
    hit_ratio: float               # percent

    def __post_init__(self) -> None:
        for name in ("false_positive_rate", "hit_ratio"):
            value = getattr(self, name)
            if math.isnan(value) or not 0 <= value <= 100:
                raise OutOfRangePercent(f"{name} must be in [0, 100], got {value}")


def maxion_townsend(stats: DetectionStats) -> float:
    return FALSE_POSITIVE_WEIGHT * stats.false_positive_rate + (100 - stats.hit_ratio)
