"""Error-rate and improvement arithmetic.

    mape(actual, computed)              (1/n) Σ |a_i − c_i| / |a_i|, as a fraction
    relative_improvement(base, ours)    (base − ours) / base × 100
    accuracy_delta(with, without)       detection-rate change in percent points
    time_reduction_rate(base, reduced)  (base − reduced) / base × 100
    combined_time_reduction(parts)      Σ stage reductions
"""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from metrics.errors import LengthMismatch, NonpositiveBaseline, ZeroActualValue


def mape(actual: Sequence[float], computed: Sequence[float]) -> float:
    a = np.asarray(actual, dtype=float)
    c = np.asarray(computed, dtype=float)
    if a.shape != c.shape:
        raise LengthMismatch(f"actual has {a.size} value(s), computed has {c.size}")
    if a.size == 0:
        raise LengthMismatch("MAPE needs at least one actual/computed pair")
    zero = np.flatnonzero(a == 0)
    if zero.size:
        raise ZeroActualValue(f"actual value is 0 at index {int(zero[0])}")
    return float(np.mean(np.abs(a - c) / np.abs(a)))


def relative_improvement(baseline: float, ours: float) -> float:
    """Percentage by which *ours* is lower than *baseline*."""
    if baseline <= 0:
        raise NonpositiveBaseline(f"baseline must be > 0, got {baseline}")
    return (baseline - ours) / baseline * 100


def accuracy_delta(with_reduction: float, without_reduction: float) -> float:
    return with_reduction - without_reduction


def time_reduction_rate(baseline_time: float, reduced_time: float) -> float:
    if baseline_time <= 0:
        raise NonpositiveBaseline(f"baseline time must be > 0, got {baseline_time}")
    return (baseline_time - reduced_time) / baseline_time * 100


def combined_time_reduction(parts: Iterable[float]) -> float:
    """Stage reductions are additive (pre-processing + detection)."""
    return float(sum(parts))
