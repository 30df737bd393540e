"""Per-node NT thresholds from a training alert log."""
from __future__ import annotations

import logging
from dataclasses import replace
from statistics import fmean
from typing import Mapping, Sequence

from alertflow.severity import SeverityScale, normalize_severity
from hrct.model import DEFAULT_NT, RiskTree
from schemas.domain import Alert

_log = logging.getLogger(__name__)


def train_thresholds(
    tree: RiskTree,
    alerts: Sequence[Alert],
    scale: SeverityScale,
) -> dict[str, float]:
    """NT per node: mean common severity of its training alerts, rescaled to [0, 1].

    Nodes with no training alert get ``DEFAULT_NT``.  Alerts whose event
    id matches no node are ignored.
    """
    per_node: dict[str, list[int]] = {}
    for alert in alerts:
        if alert.event_id not in tree.nodes:
            continue
        common = normalize_severity(alert, scale).severity_common
        per_node.setdefault(alert.event_id, []).append(common)  # type: ignore[arg-type]

    nts = {
        nid: fmean(per_node[nid]) / scale.n if nid in per_node else DEFAULT_NT
        for nid in sorted(tree.nodes)
    }
    _log.info("Trained NT for %d of %d node(s)", len(per_node), len(tree.nodes))
    return nts


def apply_thresholds(tree: RiskTree, nts: Mapping[str, float]) -> RiskTree:
    """Copy of *tree* with node NTs replaced where *nts* has a value."""
    nodes = {
        nid: replace(node, nt=nts[nid]) if nid in nts else node
        for nid, node in tree.nodes.items()
    }
    return replace(tree, nodes=nodes)
