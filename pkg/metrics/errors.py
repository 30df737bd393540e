"""Metric precondition errors.  All are ``ValueError`` subclasses."""
from __future__ import annotations


class MetricError(ValueError):
    """Base class: a metric input violates its documented precondition."""


class LengthMismatch(MetricError):
    pass


class ZeroActualValue(MetricError):
    pass


class NonpositiveBaseline(MetricError):
    pass


class OutOfRangePercent(MetricError):
    pass


class ScoreOutOfRange(MetricError):
    pass


class ZeroNetworkServices(MetricError):
    pass


class MetricsConfigViolation(Exception):
    """Raised when a metrics or asset document fails validation.

    Contains the structured list of violations so callers can format them
    however they like.
    """

    def __init__(self, violations: list[dict[str, str]]) -> None:
        self.violations = violations
        lines = [f"  ✗ {v['where']}: {v['detail']}" for v in violations]
        super().__init__(
            f"{len(violations)} metrics input violation(s):\n" + "\n".join(lines)
        )
