"""Gate aggregation of child CPs and policy-based reliability selection."""
from __future__ import annotations

from statistics import fmean
from typing import Sequence

from hrct.model import GateSpec
from schemas.domain import Alert
from schemas.taxonomy import SeverityPolicy

DEFAULT_MODERATE_K = 5


class EmptyQueue(ValueError):
    pass


def ri_prime(
    children_cp: Sequence[float],
    gate: GateSpec,
    nt: float,
    *,
    evidence: tuple[int, int] | None = None,
) -> float:
    """Aggregate child CPs through *gate*.

    OR → max, AND → min.  QUORUM/ThresholdMean → mean of the children at
    or above *nt* when at least ``mrq`` of them are, else 0.
    QUORUM/Ratio → achieved / attempted from *evidence* when at least
    ``mrq`` sub-events were achieved, else 0 (also 0 without evidence).
    """
    if not children_cp:
        raise ValueError("ri_prime needs at least one child CP")
    if gate.kind == "OR":
        return max(children_cp)
    if gate.kind == "AND":
        return min(children_cp)

    if gate.mode == "Ratio":
        if evidence is None:
            return 0.0
        achieved, attempted = evidence
        if attempted <= 0 or achieved < gate.mrq:
            return 0.0
        return min(1.0, achieved / attempted)

    passing = [cp for cp in children_cp if cp >= nt]
    if len(passing) < gate.mrq:
        return 0.0
    return fmean(passing)


def select_reliability(
    queue: Sequence[Alert],
    policy: SeverityPolicy,
    *,
    moderate_k: int = DEFAULT_MODERATE_K,
    confidence: float = 1.0,
) -> float:
    """Pick the reliability feeding a node's CP from its time-ordered queue.

    Aggressive → max over the queue; Moderate → max over the last
    *moderate_k* alerts; Conservative → the most recent alert.  Each
    reliability is the alert's own (absent → 1) times *confidence*;
    synthetic alerts are not scaled.
    """
    if not queue:
        raise EmptyQueue("cannot select a reliability from an empty alert queue")
    if moderate_k < 1:
        raise ValueError(f"moderate_k must be ≥ 1, got {moderate_k}")

    def effective(a: Alert) -> float:
        r = a.effective_reliability if a.synthetic else a.effective_reliability * confidence
        return min(1.0, max(0.0, r))

    if policy == "Aggressive":
        return max(effective(a) for a in queue)
    if policy == "Moderate":
        return max(effective(a) for a in queue[-moderate_k:])
    if policy == "Conservative":
        return effective(queue[-1])
    raise ValueError(f"unknown severity policy {policy!r}")


def quorum_evidence(queue: Sequence[Alert]) -> tuple[int, int] | None:
    """Σachieved / Σattempted over the queue's evidence-carrying alerts."""
    pairs = [a.evidence for a in queue if a.evidence is not None]
    if not pairs:
        return None
    return sum(p[0] for p in pairs), sum(p[1] for p in pairs)
