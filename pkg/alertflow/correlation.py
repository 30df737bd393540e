"""Greedy alert correlation.

Alerts with the same (source, destination, signature) that fall within
one correlation window of the group's first alert form a group.  A
later alert outside that window opens a new group for the key, so every
group's span stays within the window.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Sequence

from schemas.domain import Alert

_log = logging.getLogger(__name__)

DEFAULT_CORRELATION_WINDOW = 30.0

CorrelationKey = tuple[str, str, str]


def correlation_key(alert: Alert) -> CorrelationKey:
    return alert.source, alert.destination, alert.signature


@dataclass(frozen=True)
class CorrelatedGroup:
    key: CorrelationKey
    alerts: tuple[Alert, ...]

    @property
    def span(self) -> tuple[float, float]:
        return self.alerts[0].timestamp, self.alerts[-1].timestamp

    def __len__(self) -> int:
        return len(self.alerts)

    def to_dict(self) -> dict[str, Any]:
        first, last = self.span
        source, destination, signature = self.key
        return {
            "source": source,
            "destination": destination,
            "signature": signature,
            "first": first,
            "last": last,
            "size": len(self.alerts),
            "line_numbers": [a.line_no for a in self.alerts],
        }


def correlate(
    alerts: Sequence[Alert],
    window: float = DEFAULT_CORRELATION_WINDOW,
) -> list[CorrelatedGroup]:
    """Partition *alerts* into correlated groups, ordered by first timestamp.

    Input must be sorted by timestamp.  Each alert joins the open group
    for its key when its gap to that group's first alert is at most
    *window*; otherwise it starts a new group.

    The gap is measured from the group's first alert, not its most
    recent one, so a group never spans more than *window*.  A steady
    stream of alerts spaced less than *window* apart therefore splits
    into several groups rather than chaining into one.
    """
    if window < 0:
        raise ValueError(f"correlation window must be non-negative, got {window}")
    if any(b.timestamp < a.timestamp for a, b in zip(alerts, alerts[1:])):
        raise ValueError("alerts must be sorted by timestamp")

    groups: list[list[Alert]] = []
    open_by_key: dict[CorrelationKey, int] = {}
    for alert in alerts:
        key = correlation_key(alert)
        idx = open_by_key.get(key)
        if idx is not None and alert.timestamp - groups[idx][0].timestamp <= window:
            groups[idx].append(alert)
            continue
        open_by_key[key] = len(groups)
        groups.append([alert])

    _log.debug("Correlated %d alert(s) into %d group(s) (window %ss)",
               len(alerts), len(groups), window)
    return [CorrelatedGroup(correlation_key(g[0]), tuple(g)) for g in groups]
