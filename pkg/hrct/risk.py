"""Risk totals and the end-to-end evaluation pipeline.

    evaluate(tree, alerts, config)
      normalize severities → correlate → enqueue → impute → CPs → risk

R_i = A_i × CP(e_i) for every damage-table entry; R_total = Σ R_i.
Nodes without a damage entry contribute nothing.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from alertflow.correlation import correlate
from alertflow.queues import enqueue
from alertflow.severity import SeverityScale, normalize_all
from hrct.model import DamageEntry, RiskTree
from hrct.propagation import EvalConfig, compute_cps, impute_missed
from schemas.domain import Alert

_log = logging.getLogger(__name__)


@dataclass(frozen=True)
class NodeRisk:
    node_id: str
    cp: float
    asset_value: float | None
    risk: float


@dataclass
class RiskReport:
    tree_id: str
    root: str
    cp: dict[str, float]
    risks: dict[str, float]
    total: float
    policy: str = "per-node"
    damage: dict[str, float] = field(default_factory=dict)
    diagnostics: list[dict[str, Any]] = field(default_factory=list)
    imputations: list[dict[str, Any]] = field(default_factory=list)
    confidence: dict[str, float] = field(default_factory=dict)
    quorum_rounding: bool = False
    alert_count: int = 0

    @property
    def root_cp(self) -> float:
        return self.cp.get(self.root, 0.0)

    def rows(self) -> list[NodeRisk]:
        """One row per node, sorted by node id."""
        return [
            NodeRisk(nid, self.cp[nid], self.damage.get(nid), self.risks.get(nid, 0.0))
            for nid in sorted(self.cp)
        ]

    def as_dict(self) -> dict[str, Any]:
        return {
            "tree_id": self.tree_id,
            "root": self.root,
            "root_cp": self.root_cp,
            "policy": self.policy,
            "quorum_rounding": self.quorum_rounding,
            "alert_count": self.alert_count,
            "nodes": [
                {"node_id": r.node_id, "cp": r.cp, "asset_value": r.asset_value, "risk": r.risk}
                for r in self.rows()
            ],
            "r_total": self.total,
            "imputations": self.imputations,
            "detector_confidence": dict(sorted(self.confidence.items())),
            "diagnostics": self.diagnostics,
        }


def compute_risk(
    tree: RiskTree,
    cp_values: Mapping[str, float],
    damage: Mapping[str, DamageEntry] | None = None,
) -> RiskReport:
    """Apply the damage table to computed CPs."""
    damage = tree.damage if damage is None else damage
    diagnostics: list[dict[str, Any]] = []
    risks: dict[str, float] = {}

    for node_id in sorted(damage):
        cp = cp_values.get(node_id)
        if cp is None:
            diagnostics.append({"kind": "no_cp", "node_id": node_id,
                                "detail": "damage entry for a node with no computed CP; risk 0"})
            cp = 0.0
        risks[node_id] = damage[node_id].total * cp

    for node_id in sorted(cp_values):
        node = tree.nodes.get(node_id)
        if node is not None and node.is_leaf and cp_values[node_id] > 0 and node_id not in damage:
            diagnostics.append({"kind": "no_damage_entry", "node_id": node_id,
                                "detail": f"base event with CP {cp_values[node_id]:g} has no damage entry; risk 0"})

    total = sum(risks[nid] for nid in sorted(risks))
    return RiskReport(
        tree_id=tree.tree_id,
        root=tree.root,
        cp=dict(cp_values),
        risks=risks,
        total=total,
        damage={nid: d.total for nid, d in damage.items()},
        diagnostics=diagnostics,
    )


def evaluate(
    tree: RiskTree,
    alerts: Sequence[Alert],
    config: EvalConfig = EvalConfig(),
    *,
    scale: SeverityScale | None = None,
    confidence: Mapping[str, float] | None = None,
) -> RiskReport:
    """Run the whole pipeline for one tree and one alert set."""
    ordered = sorted(alerts, key=lambda a: a.timestamp)
    if scale is not None:
        ordered = normalize_all(ordered, scale)
    groups = correlate(ordered, config.correlation_window)
    routed = enqueue(groups, tree, severity_floor=config.severity_floor)

    conf = dict(confidence or {})
    queues = routed.queues
    imputations: list[dict[str, Any]] = []
    if config.impute:
        imputed = impute_missed(tree, queues, config=config, confidence=conf)
        queues, conf, imputations = imputed.queues, imputed.confidence, imputed.adjustments

    cps = compute_cps(tree, queues, config=config, confidence=conf)
    report = compute_risk(tree, cps)
    report.policy = config.policy or "per-node"
    report.quorum_rounding = config.quorum_rounding
    report.imputations = imputations
    report.confidence = conf
    report.alert_count = len(ordered)
    report.diagnostics = routed.diagnostics + report.diagnostics
    if routed.dropped_below_floor:
        report.diagnostics.append({
            "kind": "below_severity_floor",
            "count": routed.dropped_below_floor,
            "detail": f"{routed.dropped_below_floor} alert(s) below severity floor {config.severity_floor}",
        })
    _log.info("Tree %s: root CP %.4f, R_total %.4f over %d alert(s), %d imputation(s)",
              tree.tree_id, report.root_cp, report.total, len(ordered), len(imputations))
    return report
