"""Risk tree model: gates, nodes, damage entries and the tree itself.

Instances are built only by ``hrct.loader`` after validation; every
type here is frozen.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping

from schemas.taxonomy import GateKind, QuorumMode, SeverityPolicy

DEFAULT_NT = 0.5
DEFAULT_POLICY: SeverityPolicy = "Conservative"
DEFAULT_RI_WEIGHTS = (0.5, 0.5)
DAMAGE_SUM_TOLERANCE = 1.0


@dataclass(frozen=True)
class GateSpec:
    kind: GateKind
    mrq: int = 1
    mode: QuorumMode = "ThresholdMean"

    def __post_init__(self) -> None:
        if self.kind == "QUORUM" and self.mrq < 1:
            raise ValueError(f"QUORUM gate needs mrq ≥ 1, got {self.mrq}")

    def describe(self) -> str:
        if self.kind == "QUORUM":
            return f"QUORUM({self.mode}, mrq={self.mrq})"
        return self.kind


@dataclass(frozen=True)
class RiskNode:
    id: str
    label: str = ""
    gate: GateSpec | None = None
    children: tuple[str, ...] = ()
    detector_bound: bool = False
    detector_id: str | None = None
    nt: float = DEFAULT_NT
    policy: SeverityPolicy = DEFAULT_POLICY
    ri_weights: tuple[float, float] = DEFAULT_RI_WEIGHTS   # (w_children, w_alert)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def detector(self) -> str | None:
        """Detector whose confidence applies here (``None`` when unbound)."""
        if not self.detector_bound:
            return None
        return self.detector_id or self.id


@dataclass(frozen=True)
class DamageEntry:
    """Asset value exposed by one base event.  Component costs may be unknown."""
    node_id: str
    affected_equipment: str
    equipment_cost: float | None
    loss_of_control_cost: float | None
    operator_salary_cost: float | None
    total: float

    @property
    def component_sum(self) -> float | None:
        parts = (self.equipment_cost, self.loss_of_control_cost, self.operator_salary_cost)
        if any(p is None for p in parts):
            return None
        return sum(parts)  # type: ignore[arg-type]

    @property
    def sum_mismatch(self) -> float | None:
        """|components − total| when it exceeds the tolerance, else ``None``."""
        s = self.component_sum
        if s is None:
            return None
        gap = abs(s - self.total)
        return gap if gap > DAMAGE_SUM_TOLERANCE else None


def combine_damage(rows: list[DamageEntry]) -> DamageEntry:
    """Sum several rows for the same node into one entry (A_i = Σ totals)."""
    def add(values: list[float | None]) -> float | None:
        known = [v for v in values if v is not None]
        return sum(known) if known else None

    return DamageEntry(
        node_id=rows[0].node_id,
        affected_equipment="; ".join(r.affected_equipment for r in rows if r.affected_equipment),
        equipment_cost=add([r.equipment_cost for r in rows]),
        loss_of_control_cost=add([r.loss_of_control_cost for r in rows]),
        operator_salary_cost=add([r.operator_salary_cost for r in rows]),
        total=sum(r.total for r in rows),
    )


@dataclass(frozen=True)
class RiskTree:
    nodes: Mapping[str, RiskNode]
    root: str
    damage: Mapping[str, DamageEntry] = field(default_factory=dict)
    tree_id: str = "tree"
    description: str = ""
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def __getitem__(self, node_id: str) -> RiskNode:
        return self.nodes[node_id]

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def parents(self) -> dict[str, str]:
        return {c: n.id for n in self.nodes.values() for c in n.children}

    def parent_of(self, node_id: str) -> str | None:
        return self.parents.get(node_id)

    def post_order(self, start: str | None = None) -> list[str]:
        """Node ids below *start* (default root), children before parents."""
        order: list[str] = []
        stack: list[tuple[str, bool]] = [(start or self.root, False)]
        while stack:
            node_id, expanded = stack.pop()
            if expanded:
                order.append(node_id)
                continue
            stack.append((node_id, True))
            for child in reversed(self.nodes[node_id].children):
                stack.append((child, False))
        return order

    def leaves(self) -> list[str]:
        return [nid for nid in self.post_order() if self.nodes[nid].is_leaf]

    def walk(self) -> Iterator[tuple[str, int]]:
        """(node id, depth) in pre-order, for rendering."""
        stack = [(self.root, 0)]
        while stack:
            node_id, depth = stack.pop()
            yield node_id, depth
            for child in reversed(self.nodes[node_id].children):
                stack.append((child, depth + 1))
