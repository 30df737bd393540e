"""VEA-bility with the attackability dimension driven by HRCT CPs.

    S(v) = (impact + temporal) / 2
    V(a) = min(10, ln Σ_v e^{S(v)})
    E(a) = min(10, ln Σ_v e^{exploitability(v)}) × services_on_asset / network_services_total
    A(a) = min(10, 10 × Σ_i CP(e_i))
    VEA-bility(a) = 10 − (V + E + A) / 3

An asset with no vulnerabilities has V = E = 0.  Higher VEA-bility
means a more secure configuration.

Asset document (JSON)::

    {"assets": [{"asset_id": "MTU",
                 "services_on_asset": 1, "network_services_total": 2,
                 "vulnerabilities": [{"id": "CVE-…", "impact": 6.4,
                                      "exploitability": 10, "temporal": 5.2}],
                 "event_cps": [0.7],           # either explicit CPs …
                 "events": ["6", "quorum_8_9"] # … or node ids looked up in a risk report
    }]}
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from statistics import fmean
from typing import Any, Mapping, Sequence

import numpy as np

from metrics.errors import (
    MetricsConfigViolation,
    NonpositiveBaseline,
    ScoreOutOfRange,
    ZeroNetworkServices,
)

_log = logging.getLogger(__name__)

SCORE_MAX = 10.0


@dataclass(frozen=True)
class VulnerabilityScore:
    id: str
    impact: float
    exploitability: float
    temporal: float

    def __post_init__(self) -> None:
        for name in ("impact", "exploitability", "temporal"):
            value = getattr(self, name)
            if math.isnan(value) or not 0 <= value <= SCORE_MAX:
                raise ScoreOutOfRange(f"{self.id}: {name} must be in [0, 10], got {value}")


@dataclass(frozen=True)
class AssetProfile:
    asset_id: str
    vulnerabilities: tuple[VulnerabilityScore, ...] = ()
    services_on_asset: int = 0
    network_services_total: int = 1
    event_cps: tuple[float, ...] = ()
    events: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        if self.services_on_asset < 0 or self.services_on_asset > self.network_services_total:
            raise ValueError(
                f"{self.asset_id}: services_on_asset {self.services_on_asset} not in "
                f"[0, network_services_total={self.network_services_total}]")
        for cp in self.event_cps:
            if not 0 <= cp <= 1:
                raise ValueError(f"{self.asset_id}: CP {cp} outside [0, 1]")


def severity(v: VulnerabilityScore) -> float:
    return (v.impact + v.temporal) / 2


def _log_sum_exp(scores: Sequence[float]) -> float:
    if not scores:
        return 0.0
    return min(SCORE_MAX, float(np.logaddexp.reduce(np.asarray(scores, dtype=float))))


def vulnerability_dim(a: AssetProfile) -> float:
    return _log_sum_exp([severity(v) for v in a.vulnerabilities])


def exploitability_dim(a: AssetProfile) -> float:
    if a.network_services_total <= 0:
        raise ZeroNetworkServices(f"{a.asset_id}: network_services_total must be > 0")
    ratio = a.services_on_asset / a.network_services_total
    return _log_sum_exp([v.exploitability for v in a.vulnerabilities]) * ratio


def attackability_dim(a: AssetProfile) -> float:
    return min(SCORE_MAX, 10 * sum(a.event_cps))


def veability_from_dims(v: float, e: float, a: float) -> float:
    return SCORE_MAX - (v + e + a) / 3


def veability(a: AssetProfile) -> float:
    return veability_from_dims(vulnerability_dim(a), exploitability_dim(a), attackability_dim(a))


def veability_advantage(ours: float, baseline: float) -> float:
    """How much more VEA-ble *ours* is than *baseline*, in percent."""
    if baseline <= 0:
        raise NonpositiveBaseline(f"baseline VEA-bility must be > 0, got {baseline}")
    return (ours - baseline) / baseline * 100


def mean_veability(assets: Sequence[AssetProfile]) -> float:
    return fmean(veability(a) for a in assets) if assets else 0.0


# ── Asset documents ───────────────────────────────────────────────

def cps_from_report(report: Mapping[str, Any]) -> dict[str, float]:
    """node_id → CP from a risk report JSON document."""
    return {n["node_id"]: float(n["cp"]) for n in report.get("nodes", [])}


def _num(raw: Mapping[str, Any], key: str, where: str, violations: list[dict[str, str]]) -> float | None:
    value = raw.get(key)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        violations.append({"where": where, "detail": f"'{key}' must be a number, got {value!r}"})
        return None
    return float(value)


def validate_assets_dict(raw: Any, cp_lookup: Mapping[str, float] | None = None) -> list[dict[str, str]]:
    """Collect every problem in an asset document without building anything."""
    violations: list[dict[str, str]] = []
    if not isinstance(raw, dict) or not isinstance(raw.get("assets"), list):
        return [{"where": "<root>", "detail": "expected an object with an 'assets' list"}]

    seen: set[str] = set()
    for i, asset in enumerate(raw["assets"]):
        where = f"assets[{i}]"
        if not isinstance(asset, dict):
            violations.append({"where": where, "detail": "asset must be an object"})
            continue
        aid = asset.get("asset_id")
        if not isinstance(aid, str) or not aid:
            violations.append({"where": where, "detail": "missing 'asset_id'"})
        elif aid in seen:
            violations.append({"where": where, "detail": f"duplicate asset_id {aid!r}"})
        else:
            seen.add(aid)
            where = aid

        on_asset = _num(asset, "services_on_asset", where, violations)
        total = _num(asset, "network_services_total", where, violations)
        for key, count in (("services_on_asset", on_asset), ("network_services_total", total)):
            if count is not None and not float(count).is_integer():
                violations.append({"where": where, "detail": f"'{key}' {count} is not a whole count"})
        if total is not None and total <= 0:
            violations.append({"where": where, "detail": "'network_services_total' must be > 0"})
        if on_asset is not None and total is not None and not 0 <= on_asset <= total:
            violations.append({"where": where,
                               "detail": "'services_on_asset' must be in [0, network_services_total]"})

        for j, vuln in enumerate(asset.get("vulnerabilities", [])):
            vwhere = f"{where}.vulnerabilities[{j}]"
            if not isinstance(vuln, dict):
                violations.append({"where": vwhere, "detail": "vulnerability must be an object"})
                continue
            for key in ("impact", "exploitability", "temporal"):
                score = _num(vuln, key, vwhere, violations)
                if score is not None and not 0 <= score <= SCORE_MAX:
                    violations.append({"where": vwhere, "detail": f"'{key}' {score} outside [0, 10]"})

        for cp in asset.get("event_cps", []):
            if isinstance(cp, bool) or not isinstance(cp, (int, float)) or not 0 <= cp <= 1:
                violations.append({"where": where, "detail": f"event CP {cp!r} outside [0, 1]"})
        events = asset.get("events", [])
        if events and cp_lookup is None:
            violations.append({"where": where,
                               "detail": "'events' given but no risk report to take CPs from"})
        elif events:
            for ev in events:
                if ev not in cp_lookup:  # type: ignore[operator]
                    violations.append({"where": where, "detail": f"event {ev!r} not in the risk report"})
    return violations


def build_assets(raw: Mapping[str, Any], cp_lookup: Mapping[str, float] | None = None) -> list[AssetProfile]:
    violations = validate_assets_dict(raw, cp_lookup)
    if violations:
        raise MetricsConfigViolation(violations)

    assets: list[AssetProfile] = []
    for asset in raw["assets"]:
        events = tuple(asset.get("events", []))
        cps = [float(c) for c in asset.get("event_cps", [])]
        if events and cp_lookup is not None:
            cps.extend(cp_lookup[ev] for ev in events)
        assets.append(AssetProfile(
            asset_id=asset["asset_id"],
            vulnerabilities=tuple(
                VulnerabilityScore(
                    id=str(v.get("id", f"{asset['asset_id']}-{j}")),
                    impact=float(v["impact"]),
                    exploitability=float(v["exploitability"]),
                    temporal=float(v["temporal"]),
                )
                for j, v in enumerate(asset.get("vulnerabilities", []))
            ),
            services_on_asset=int(asset["services_on_asset"]),
            network_services_total=int(asset["network_services_total"]),
            event_cps=tuple(cps),
            events=events,
        ))
    _log.info("Loaded %d asset profile(s)", len(assets))
    return assets


def load_assets(path: str | Path, report_path: str | Path | None = None) -> list[AssetProfile]:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    cp_lookup = None
    if report_path is not None:
        cp_lookup = cps_from_report(json.loads(Path(report_path).read_text(encoding="utf-8")))
    return build_assets(raw, cp_lookup)
