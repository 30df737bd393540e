"""Route correlated alerts into per-node queues of a risk tree."""
from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Sequence

from alertflow.correlation import CorrelatedGroup
from schemas.domain import Alert

if TYPE_CHECKING:
    from hrct.model import RiskTree

_log = logging.getLogger(__name__)

AlertQueues = dict[str, list[Alert]]


@dataclass
class EnqueueResult:
    queues: AlertQueues = field(default_factory=dict)
    diagnostics: list[dict[str, Any]] = field(default_factory=list)
    dropped_below_floor: int = 0

    def queue(self, node_id: str) -> list[Alert]:
        return self.queues.get(node_id, [])


def enqueue(
    groups: Sequence[CorrelatedGroup],
    tree: "RiskTree",
    *,
    severity_floor: int = 0,
) -> EnqueueResult:
    """Bind every member alert to the tree node named by its ``event_id``.

    Each queue is ordered by timestamp; ties keep the order in which the
    alerts appear in *groups*.  Alerts whose common severity is below
    *severity_floor* are dropped (alerts not yet normalized are kept).
    Unknown event ids become diagnostics and never raise.
    """
    result = EnqueueResult()
    unresolved: Counter[str] = Counter()
    seq = 0
    staged: dict[str, list[tuple[float, int, Alert]]] = {}

    for group in groups:
        for alert in group.alerts:
            seq += 1
            if alert.event_id not in tree.nodes:
                unresolved[alert.event_id] += 1
                continue
            if alert.severity_common is not None and alert.severity_common < severity_floor:
                result.dropped_below_floor += 1
                continue
            staged.setdefault(alert.event_id, []).append((alert.timestamp, seq, alert))

    for node_id in sorted(staged):
        result.queues[node_id] = [a for _, _, a in sorted(staged[node_id], key=lambda t: t[:2])]

    for event_id, count in sorted(unresolved.items()):
        result.diagnostics.append({
            "kind": "unresolved_event",
            "event_id": event_id,
            "count": count,
            "detail": f"event id {event_id!r} matches no tree node",
        })
    if unresolved:
        _log.warning("%d alert(s) reference unknown event id(s): %s",
                     sum(unresolved.values()), ", ".join(sorted(unresolved)))
    if result.dropped_below_floor:
        _log.info("%d alert(s) below severity floor %d dropped",
                  result.dropped_below_floor, severity_floor)
    return result
