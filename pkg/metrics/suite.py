"""Metric suite: one JSON document in, a (metric, subject, value) table out.

Document sections (all optional)::

    mape                      [{subject, actual: [...], computed: [...]}]
    improvements              [{subject, baseline, ours}]
    detection_costs           [{subject, false_positive_rate, hit_ratio}]
    accuracy_deltas           [{subject, with_reduction, without_reduction}]
    time_reductions           [{subject, baseline_time, reduced_time}]
    combined_time_reductions  [{subject, parts: [...]}]
    veability                 {assets: PATH, risk_report: PATH?}
    veability_advantages      [{subject, ours, baseline}]

Paths are resolved relative to the document's directory.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

from metrics.accuracy import (
    accuracy_delta,
    combined_time_reduction,
    mape,
    relative_improvement,
    time_reduction_rate,
)
from metrics.detection_cost import DetectionStats, maxion_townsend
from metrics.errors import MetricsConfigViolation
from metrics.veability import (
    AssetProfile,
    attackability_dim,
    exploitability_dim,
    load_assets,
    veability,
    veability_advantage,
    vulnerability_dim,
)

_log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MetricRow:
    metric: str
    subject: str
    value: float


# section → (required numeric fields, row builder)
_SCALAR_SECTIONS: dict[str, tuple[tuple[str, ...], Callable[[Mapping[str, Any]], list[tuple[str, float]]]]] = {
    "improvements": (
        ("baseline", "ours"),
        lambda e: [("relative_improvement_pct", relative_improvement(e["baseline"], e["ours"]))],
    ),
    "detection_costs": (
        ("false_positive_rate", "hit_ratio"),
        lambda e: [("maxion_townsend_cost", maxion_townsend(
            DetectionStats(e["false_positive_rate"], e["hit_ratio"])))],
    ),
    "accuracy_deltas": (
        ("with_reduction", "without_reduction"),
        lambda e: [("accuracy_delta_pts", accuracy_delta(e["with_reduction"], e["without_reduction"]))],
    ),
    "time_reductions": (
        ("baseline_time", "reduced_time"),
        lambda e: [("time_reduction_pct", time_reduction_rate(e["baseline_time"], e["reduced_time"]))],
    ),
    "veability_advantages": (
        ("ours", "baseline"),
        lambda e: [("veability_advantage_pct", veability_advantage(e["ours"], e["baseline"]))],
    ),
}

KNOWN_SECTIONS = frozenset(_SCALAR_SECTIONS) | {"mape", "combined_time_reductions", "veability"}


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _number_list(value: Any) -> bool:
    return isinstance(value, list) and all(_is_number(v) for v in value)


def validate_metrics_dict(raw: Any) -> list[dict[str, str]]:
    """Shape checks only; arithmetic preconditions are raised when computing."""
    if not isinstance(raw, dict):
        return [{"where": "<root>", "detail": "expected a JSON object"}]
    violations: list[dict[str, str]] = []
    for key in sorted(set(raw) - KNOWN_SECTIONS):
        violations.append({"where": key, "detail": "unknown section"})

    list_sections = {**{k: v[0] for k, v in _SCALAR_SECTIONS.items()},
                     "mape": (), "combined_time_reductions": ()}
    for section, fields in list_sections.items():
        entries = raw.get(section, [])
        if not isinstance(entries, list):
            violations.append({"where": section, "detail": "expected a list"})
            continue
        for i, entry in enumerate(entries):
            where = f"{section}[{i}]"
            if not isinstance(entry, dict) or not isinstance(entry.get("subject"), str):
                violations.append({"where": where, "detail": "entry must be an object with a 'subject'"})
                continue
            for f in fields:
                if not _is_number(entry.get(f)):
                    violations.append({"where": where, "detail": f"'{f}' must be a number"})
            if section == "mape":
                for f in ("actual", "computed"):
                    if not _number_list(entry.get(f)):
                        violations.append({"where": where, "detail": f"'{f}' must be a list of numbers"})
            if section == "combined_time_reductions" and not _number_list(entry.get("parts")):
                violations.append({"where": where, "detail": "'parts' must be a list of numbers"})

    vea = raw.get("veability")
    if vea is not None and (not isinstance(vea, dict) or not isinstance(vea.get("assets"), str)):
        violations.append({"where": "veability", "detail": "expected {\"assets\": PATH}"})
    return violations


def veability_rows(assets: Sequence[AssetProfile]) -> list[MetricRow]:
    rows: list[MetricRow] = []
    for asset in assets:
        rows.extend([
            MetricRow("vulnerability_dim", asset.asset_id, vulnerability_dim(asset)),
            MetricRow("exploitability_dim", asset.asset_id, exploitability_dim(asset)),
            MetricRow("attackability_dim", asset.asset_id, attackability_dim(asset)),
            MetricRow("veability", asset.asset_id, veability(asset)),
        ])
    return rows


def run_metrics(
    raw: Mapping[str, Any],
    base_dir: str | Path = ".",
    *,
    assets: Sequence[AssetProfile] | None = None,
) -> list[MetricRow]:
    """Compute every configured metric, in document section order.

    *assets*, when given, replace the document's ``veability`` section.
    """
    violations = validate_metrics_dict(raw)
    if violations:
        raise MetricsConfigViolation(violations)

    rows: list[MetricRow] = []
    for entry in raw.get("mape", []):
        rows.append(MetricRow("mape", entry["subject"], mape(entry["actual"], entry["computed"])))
    for section, (_, build) in _SCALAR_SECTIONS.items():
        for entry in raw.get(section, []):
            rows.extend(MetricRow(metric, entry["subject"], value) for metric, value in build(entry))
    for entry in raw.get("combined_time_reductions", []):
        rows.append(MetricRow("combined_time_reduction_pct", entry["subject"],
                              combined_time_reduction(entry["parts"])))

    vea = raw.get("veability")
    if assets is None and vea is not None:
        base = Path(base_dir)
        report = vea.get("risk_report")
        assets = load_assets(base / vea["assets"], base / report if report else None)
    rows.extend(veability_rows(assets or ()))
    _log.info("Computed %d metric row(s)", len(rows))
    return rows


def load_metrics(path: str | Path) -> list[MetricRow]:
    p = Path(path)
    return run_metrics(json.loads(p.read_text(encoding="utf-8")), p.parent)
