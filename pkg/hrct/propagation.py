# hrct/propagation.py: Compromised Probability propagation and missed-alert imputation.
"""Bottom-up CP evaluation over a ``RiskTree``.

Per node:
  leaf                               → selected alert reliability (0 when silent)
  internal, no detector or no alerts → RI'(children)
  internal, detector with alerts     → RI(RI'(children), selected reliability)

RI is ``w_children·c + w_alert·r`` (weighted mode) or ``max(c, r)``.
Every CP is clamped to [0, 1].
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Mapping

from alertflow.correlation import DEFAULT_CORRELATION_WINDOW
from hrct.gates import DEFAULT_MODERATE_K, quorum_evidence, ri_prime, select_reliability
from hrct.model import RiskNode, RiskTree
from schemas.domain import Alert
from schemas.taxonomy import RIMode, SeverityPolicy

_log = logging.getLogger(__name__)

AlertQueues = Mapping[str, list[Alert]]
Policies = SeverityPolicy | Mapping[str, SeverityPolicy] | None

IMPUTED_SIGNATURE = "imputed-missed-alert"


@dataclass(frozen=True)
class EvalConfig:
    """Tunables for one risk evaluation."""
    policy: SeverityPolicy | None = None        # overrides every node's policy
    moderate_k: int = DEFAULT_MODERATE_K
    ri_mode: RIMode = "weighted"
    quorum_rounding: bool = False               # floor QUORUM CPs to one decimal
    severity_floor: int = 0
    correlation_window: float = DEFAULT_CORRELATION_WINDOW
    impute: bool = True
    confidence_decay: float = 0.9
    confidence_floor: float = 0.5

    def __post_init__(self) -> None:
        if self.moderate_k < 1:
            raise ValueError(f"moderate_k must be ≥ 1, got {self.moderate_k}")
        if not 0 < self.confidence_decay <= 1:
            raise ValueError(f"confidence_decay must be in (0, 1], got {self.confidence_decay}")
        if not 0 <= self.confidence_floor <= 1:
            raise ValueError(f"confidence_floor must be in [0, 1], got {self.confidence_floor}")
        if self.ri_mode not in ("weighted", "max"):
            raise ValueError(f"ri_mode must be 'weighted' or 'max', got {self.ri_mode!r}")


def _clamp(x: float) -> float:
    return min(1.0, max(0.0, x))


def floor_one_decimal(x: float) -> float:
    return math.floor(x * 10 + 1e-9) / 10


def _policy_for(node: RiskNode, policies: Policies, config: EvalConfig) -> SeverityPolicy:
    if isinstance(policies, str):
        return policies
    if isinstance(policies, Mapping) and node.id in policies:
        return policies[node.id]
    return config.policy or node.policy


def _node_cp(
    node: RiskNode,
    cps: Mapping[str, float],
    queue: list[Alert],
    policy: SeverityPolicy,
    config: EvalConfig,
    confidence: Mapping[str, float],
) -> float:
    conf = confidence.get(node.detector, 1.0) if node.detector else 1.0
    if node.is_leaf:
        if not queue:
            return 0.0
        return select_reliability(queue, policy, moderate_k=config.moderate_k, confidence=conf)

    assert node.gate is not None
    children = [cps[c] for c in node.children]
    combined = ri_prime(children, node.gate, node.nt, evidence=quorum_evidence(queue))
    if node.gate.kind == "QUORUM" and config.quorum_rounding:
        combined = floor_one_decimal(combined)

    if node.detector is None or not queue:
        return _clamp(combined)

    r = select_reliability(queue, policy, moderate_k=config.moderate_k, confidence=conf)
    if config.ri_mode == "max":
        return _clamp(max(combined, r))
    w_children, w_alert = node.ri_weights
    return _clamp(w_children * combined + w_alert * r)


def compute_cps(
    tree: RiskTree,
    queues: AlertQueues,
    policies: Policies = None,
    *,
    config: EvalConfig = EvalConfig(),
    confidence: Mapping[str, float] | None = None,
    start: str | None = None,
) -> dict[str, float]:
    """CP of every node under *start* (default: the whole tree), post-order."""
    confidence = confidence or {}
    cps: dict[str, float] = {}
    for node_id in tree.post_order(start):
        node = tree[node_id]
        cps[node_id] = _node_cp(
            node, cps, queues.get(node_id, []),
            _policy_for(node, policies, config), config, confidence)
    return cps


def compute_cp(
    tree: RiskTree,
    node_id: str,
    queues: AlertQueues,
    policies: Policies = None,
    *,
    config: EvalConfig = EvalConfig(),
    confidence: Mapping[str, float] | None = None,
) -> float:
    """CP of a single node, evaluating only its subtree."""
    return compute_cps(tree, queues, policies, config=config,
                       confidence=confidence, start=node_id)[node_id]


# ── Missed-alert imputation ───────────────────────────────────────

@dataclass
class ImputationResult:
    queues: dict[str, list[Alert]]
    adjustments: list[dict[str, Any]] = field(default_factory=list)
    confidence: dict[str, float] = field(default_factory=dict)


def impute_missed(
    tree: RiskTree,
    queues: AlertQueues,
    policies: Policies = None,
    *,
    config: EvalConfig = EvalConfig(),
    confidence: Mapping[str, float] | None = None,
) -> ImputationResult:
    """Fill silent detector-bound nodes sandwiched between flagged nodes.

    A node qualifies when it is detector-bound, has children that all
    hold alerts, has a parent that holds alerts, and holds none itself.
    It receives one synthetic alert whose reliability is RI' of its
    children's CPs (computed before imputation), and its detector's
    confidence is multiplied by ``confidence_decay`` down to
    ``confidence_floor``.  Nodes are visited bottom-up, so an imputed
    node counts as flagged for its own parent.
    """
    conf = dict(confidence or {})
    baseline = compute_cps(tree, queues, policies, config=config, confidence=conf)
    out: dict[str, list[Alert]] = {nid: list(q) for nid, q in queues.items()}
    parents = tree.parents
    result = ImputationResult(queues=out, confidence=conf)

    for node_id in tree.post_order():
        node = tree[node_id]
        parent = parents.get(node_id)
        if (node.detector is None or node.is_leaf or out.get(node_id)
                or parent is None or not out.get(parent)
                or not all(out.get(c) for c in node.children)):
            continue

        assert node.gate is not None
        children_cps = [baseline[c] for c in node.children]
        reliability = _clamp(ri_prime(children_cps, node.gate, node.nt))
        neighbours = [out[c][-1] for c in node.children] + [out[parent][-1]]
        latest = max(neighbours, key=lambda a: a.timestamp)
        out[node_id] = [Alert(
            timestamp=latest.timestamp,
            detector_id=node.detector,
            event_id=node_id,
            signature=IMPUTED_SIGNATURE,
            source=latest.source,
            destination=latest.destination,
            severity_native=0.0,
            reliability=reliability,
            synthetic=True,
        )]

        before = conf.get(node.detector, 1.0)
        after = max(config.confidence_floor, before * config.confidence_decay)
        conf[node.detector] = after
        result.adjustments.append({
            "node_id": node_id,
            "detector_id": node.detector,
            "imputed_reliability": reliability,
            "confidence_before": before,
            "confidence_after": after,
        })
        _log.info("Imputed missed alert at node %s (reliability %.4f); detector %s confidence %.4f → %.4f",
                  node_id, reliability, node.detector, before, after)

    return result
