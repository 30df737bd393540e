"""Severity normalization onto one common ``[0, n]`` range.

Scale file (JSON)::

    {"n": 10,
     "default": [0, 10],
     "detectors": {"snort": [1, 5], "suricata": [0, 255]}}

``default`` is optional and applies to detectors without an entry.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping

from schemas.domain import Alert

_log = logging.getLogger(__name__)

DEFAULT_COMMON_MAX = 10


class UnregisteredDetector(LookupError):
    """Alert from a detector with no native range and no default range."""


class ScaleViolation(Exception):
    def __init__(self, violations: list[dict[str, str]]) -> None:
        self.violations = violations
        lines = [f"  ✗ [{v['detector']}] {v['detail']}" for v in violations]
        super().__init__(f"{len(violations)} severity scale violation(s):\n" + "\n".join(lines))


NativeRange = tuple[float, float]


@dataclass(frozen=True)
class SeverityScale:
    """Common upper bound ``n`` plus per-detector native ranges."""
    n: int = DEFAULT_COMMON_MAX
    ranges: Mapping[str, NativeRange] = field(default_factory=dict)
    default: NativeRange | None = None

    def __post_init__(self) -> None:
        violations = _check_scale(self.n, self.ranges, self.default)
        if violations:
            raise ScaleViolation(violations)

    def range_for(self, detector_id: str) -> NativeRange:
        if detector_id in self.ranges:
            return self.ranges[detector_id]
        if self.default is not None:
            return self.default
        raise UnregisteredDetector(f"no severity range registered for detector {detector_id!r}")

    def common(self, native: float, detector_id: str) -> int:
        """round(n × (native − min)/(max − min)), halves rounded up, clamped to [0, n]."""
        lo, hi = self.range_for(detector_id)
        scaled = self.n * (native - lo) / (hi - lo)
        return min(self.n, max(0, math.floor(scaled + 0.5)))


def _check_scale(
    n: Any, ranges: Mapping[str, Any], default: Any,
) -> list[dict[str, str]]:
    violations: list[dict[str, str]] = []
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        violations.append({"detector": "<scale>", "detail": f"n must be an integer ≥ 1, got {n!r}"})
    items = list(ranges.items())
    if default is not None:
        items.append(("<default>", default))
    for det, rng in items:
        try:
            lo, hi = (float(x) for x in rng)
        except (TypeError, ValueError):
            violations.append({"detector": det, "detail": f"range must be [min, max], got {rng!r}"})
            continue
        if not lo < hi:
            violations.append({"detector": det, "detail": f"native_min {lo} must be < native_max {hi}"})
    return violations


def build_scale(raw: Mapping[str, Any]) -> SeverityScale:
    detectors = raw.get("detectors", {}) or {}
    if not isinstance(detectors, Mapping):
        raise ScaleViolation([{"detector": "<scale>", "detail": "detectors must be an object"}])
    n = raw.get("n", DEFAULT_COMMON_MAX)
    default = raw.get("default")
    violations = _check_scale(n, detectors, default)
    if violations:
        raise ScaleViolation(violations)
    return SeverityScale(
        n=n,
        ranges={d: (float(r[0]), float(r[1])) for d, r in detectors.items()},
        default=None if default is None else (float(default[0]), float(default[1])),
    )


def load_scale(path: str | Path) -> SeverityScale:
    with open(path, encoding="utf-8") as f:
        raw = json.load(f)
    if not isinstance(raw, dict):
        raise ScaleViolation([{"detector": "<scale>", "detail": "document must be an object"}])
    scale = build_scale(raw)
    _log.debug("Loaded severity scale n=%d, %d detector(s)", scale.n, len(scale.ranges))
    return scale


def normalize_severity(alert: Alert, scale: SeverityScale) -> Alert:
    """Return *alert* with ``severity_common`` set on the scale's common range."""
    return alert.with_changes(severity_common=scale.common(alert.severity_native, alert.detector_id))


def normalize_all(alerts: Iterable[Alert], scale: SeverityScale) -> list[Alert]:
    return [normalize_severity(a, scale) for a in alerts]
