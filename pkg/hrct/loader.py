# hrct/loader.py: Fail-fast risk tree and damage table loading.
"""Tree definitions are JSON documents::

    {
      "tree_id": "dos_case_study",
      "root": "10",
      "nodes": [
        {"id": "10", "label": "Denial of service", "gate": {"kind": "OR"},
         "children": ["a", "b"]},
        {"id": "6", "label": "Packet length modified", "detector_bound": true,
         "nt": 0.5, "policy": "Aggressive", "ri_weights": [0.5, 0.5]}
      ],
      "damage": [
        {"node_id": "6", "equipment": "Pipeline", "total": 900,
         "costs": {"equipment": 300, "loss_of_control": 500, "operator_salary": 100}}
      ]
    }

Every field and every structural rule is checked first; problems are
collected as violation dicts ``{"code", "node_id", "detail"}`` and
raised together as ``TreeViolation``.  Frozen model objects are built
only from a clean document.  Damage rows whose components miss the
total by more than one currency unit are warnings, not violations.

Usage:
    from hrct.loader import load_tree
    tree = load_tree("dos_case_study")       # shipped tree by name
    tree = load_tree("path/to/tree.json")
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import replace
from pathlib import Path
from typing import Any, Mapping

from hrct.model import (
    DEFAULT_NT,
    DEFAULT_POLICY,
    DEFAULT_RI_WEIGHTS,
    DamageEntry,
    GateSpec,
    RiskNode,
    RiskTree,
    combine_damage,
)
from schemas.taxonomy import ALL_GATE_KINDS, ALL_QUORUM_MODES, normalize_policy

_log = logging.getLogger(__name__)

TREES_DIR = Path(__file__).parent / "trees"
DAMAGE_DIR = Path(__file__).parent / "damage"


# ── Exception ─────────────────────────────────────────────────────

class TreeViolation(Exception):
    """Raised when a tree or damage definition is structurally invalid."""

    def __init__(self, violations: list[dict[str, str]]) -> None:
        self.violations = violations
        lines = [f"  ✗ {v['code']} [{v['node_id']}] {v['detail']}" for v in violations]
        super().__init__(f"{len(violations)} tree violation(s):\n" + "\n".join(lines))

    @property
    def codes(self) -> list[str]:
        return [v["code"] for v in self.violations]


def _violation(code: str, node_id: str, detail: str) -> dict[str, str]:
    return {"code": code, "node_id": node_id, "detail": detail}


def _is_number(x: Any) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


# ── Node-level checks ─────────────────────────────────────────────

def _check_node(raw: dict[str, Any], nid: str) -> list[dict[str, str]]:
    out: list[dict[str, str]] = []
    children = raw.get("children", [])
    gate = raw.get("gate")

    if not isinstance(children, list) or not all(isinstance(c, str) for c in children):
        out.append(_violation("InvalidNode", nid, "children must be a list of node ids"))
        children = []

    if gate is None:
        if children:
            out.append(_violation("InvalidGate", nid, "internal node needs a gate"))
    elif not isinstance(gate, dict):
        out.append(_violation("InvalidGate", nid, "gate must be an object"))
    else:
        kind = gate.get("kind")
        if not children:
            out.append(_violation("InvalidGate", nid, "leaf nodes carry no gate"))
        if kind not in ALL_GATE_KINDS:
            out.append(_violation("InvalidGate", nid, f"kind {kind!r} not in {list(ALL_GATE_KINDS)}"))
        elif kind == "QUORUM":
            mrq = gate.get("mrq", 1)
            if not isinstance(mrq, int) or isinstance(mrq, bool) or mrq < 1:
                out.append(_violation("InvalidGate", nid, f"mrq must be an integer ≥ 1, got {mrq!r}"))
            mode = gate.get("mode", "ThresholdMean")
            if mode not in ALL_QUORUM_MODES:
                out.append(_violation("InvalidGate", nid, f"mode {mode!r} not in {list(ALL_QUORUM_MODES)}"))

    nt = raw.get("nt", DEFAULT_NT)
    if not _is_number(nt) or nt < 0:
        out.append(_violation("InvalidThreshold", nid, f"nt must be a number ≥ 0, got {nt!r}"))

    policy = raw.get("policy", DEFAULT_POLICY)
    try:
        normalize_policy(str(policy))
    except ValueError as exc:
        out.append(_violation("InvalidPolicy", nid, str(exc)))

    weights = raw.get("ri_weights", list(DEFAULT_RI_WEIGHTS))
    if (not isinstance(weights, list) or len(weights) != 2
            or not all(_is_number(w) and w >= 0 for w in weights) or sum(weights) <= 0):
        out.append(_violation("InvalidWeights", nid,
                              f"ri_weights must be two non-negative numbers with a positive sum, got {weights!r}"))

    if not isinstance(raw.get("detector_bound", False), bool):
        out.append(_violation("InvalidNode", nid, "detector_bound must be true or false"))
    det = raw.get("detector_id")
    if det is not None and not isinstance(det, str):
        out.append(_violation("InvalidNode", nid, "detector_id must be a string"))
    return out


# ── Structure checks ──────────────────────────────────────────────

def _find_cycles(children: Mapping[str, list[str]]) -> list[list[str]]:
    """Every distinct cycle reachable by DFS, as node id paths."""
    WHITE, GREY, BLACK = 0, 1, 2
    colour = dict.fromkeys(children, WHITE)
    cycles: list[list[str]] = []
    seen: set[frozenset[str]] = set()

    for start in sorted(children):
        if colour[start] != WHITE:
            continue
        path: list[str] = []
        stack: list[tuple[str, int]] = [(start, 0)]
        while stack:
            node, i = stack.pop()
            if i == 0:
                colour[node] = GREY
                path.append(node)
            kids = [c for c in children.get(node, []) if c in colour]
            if i < len(kids):
                stack.append((node, i + 1))
                child = kids[i]
                if colour[child] == GREY:
                    cycle = path[path.index(child):] + [child]
                    key = frozenset(cycle)
                    if key not in seen:
                        seen.add(key)
                        cycles.append(cycle)
                elif colour[child] == WHITE:
                    stack.append((child, 0))
            else:
                colour[node] = BLACK
                path.pop()
    return cycles


def validate_tree_dict(raw: Any) -> list[dict[str, str]]:
    """Collect every structural and field violation in a tree document."""
    if not isinstance(raw, dict):
        return [_violation("InvalidDocument", "<tree>", "must be a JSON object")]
    nodes = raw.get("nodes")
    if not isinstance(nodes, list) or not nodes:
        return [_violation("InvalidDocument", "<tree>", "nodes must be a non-empty list")]

    violations: list[dict[str, str]] = []
    children: dict[str, list[str]] = {}
    for i, node in enumerate(nodes):
        nid = node.get("id") if isinstance(node, dict) else None
        if not isinstance(nid, str) or not nid:
            violations.append(_violation("InvalidNode", f"#{i}", "node needs a non-empty string id"))
            continue
        if nid in children:
            violations.append(_violation("DuplicateNodeId", nid, "node id declared twice"))
            continue
        violations.extend(_check_node(node, nid))
        kids = node.get("children", [])
        children[nid] = [c for c in kids if isinstance(c, str)] if isinstance(kids, list) else []

    parent_of: dict[str, str] = {}
    for nid in children:
        for child in children[nid]:
            if child not in children:
                violations.append(_violation("DanglingChildId", nid, f"child {child!r} is not a declared node"))
            elif child in parent_of:
                violations.append(_violation(
                    "MultipleParents", child,
                    f"listed under both {parent_of[child]!r} and {nid!r}"))
            else:
                parent_of[child] = nid

    for cycle in _find_cycles(children):
        violations.append(_violation("CycleDetected", cycle[0], "cycle: " + " → ".join(cycle)))

    root = raw.get("root")
    if root is None:
        roots = [n for n in children if n not in parent_of]
        if len(roots) != 1:
            violations.append(_violation(
                "MissingRoot", "<tree>",
                f"no root declared and {len(roots)} parentless node(s) found: {sorted(roots)}"))
    elif root not in children:
        violations.append(_violation("MissingRoot", str(root), "root is not a declared node"))
    elif root in parent_of:
        violations.append(_violation("MissingRoot", root, f"root has parent {parent_of[root]!r}"))

    if not any(v["code"] in ("CycleDetected", "MissingRoot") for v in violations):
        root_id = root if root is not None else next(n for n in children if n not in parent_of)
        reachable: set[str] = set()
        frontier = [root_id]
        while frontier:
            n = frontier.pop()
            if n in reachable or n not in children:
                continue
            reachable.add(n)
            frontier.extend(children[n])
        for n in children:
            if n not in reachable:
                violations.append(_violation("DisconnectedNode", n, "not reachable from the root"))

    violations.extend(_validate_damage_rows(raw.get("damage", []), set(children)))
    return violations


# ── Damage table ──────────────────────────────────────────────────

_COST_FIELDS = ("equipment", "loss_of_control", "operator_salary")


def _validate_damage_rows(rows: Any, node_ids: set[str] | None) -> list[dict[str, str]]:
    if not isinstance(rows, list):
        return [_violation("InvalidDamage", "<damage>", "damage must be a list")]
    out: list[dict[str, str]] = []
    for i, row in enumerate(rows):
        if not isinstance(row, dict):
            out.append(_violation("InvalidDamage", f"#{i}", "damage row must be an object"))
            continue
        nid = row.get("node_id")
        if not isinstance(nid, str):
            out.append(_violation("InvalidDamage", f"#{i}", "node_id missing"))
            continue
        if node_ids is not None and nid not in node_ids:
            out.append(_violation("DanglingDamageNode", nid, "damage row for an undeclared node"))
        total = row.get("total")
        if not _is_number(total) or total < 0:
            out.append(_violation("InvalidDamage", nid, f"total must be a number ≥ 0, got {total!r}"))
        costs = row.get("costs", {})
        if not isinstance(costs, dict):
            out.append(_violation("InvalidDamage", nid, "costs must be an object"))
            continue
        for name in _COST_FIELDS:
            v = costs.get(name)
            if v is not None and (not _is_number(v) or v < 0):
                out.append(_violation("InvalidDamage", nid, f"{name} cost must be a number ≥ 0 or null"))
    return out


def _build_damage_entry(row: dict[str, Any]) -> DamageEntry:
    costs = row.get("costs", {}) or {}

    def cost(name: str) -> float | None:
        v = costs.get(name)
        return None if v is None else float(v)

    return DamageEntry(
        node_id=row["node_id"],
        affected_equipment=str(row.get("equipment", "")),
        equipment_cost=cost("equipment"),
        loss_of_control_cost=cost("loss_of_control"),
        operator_salary_cost=cost("operator_salary"),
        total=float(row["total"]),
    )


def build_damage(rows: list[dict[str, Any]]) -> tuple[dict[str, DamageEntry], list[str]]:
    """Aggregate validated rows per node.  Returns (entries, sum-check warnings)."""
    grouped: dict[str, list[DamageEntry]] = {}
    warnings: list[str] = []
    for row in rows:
        entry = _build_damage_entry(row)
        gap = entry.sum_mismatch
        if gap is not None:
            warnings.append(
                f"damage row for node {entry.node_id}: components sum to "
                f"{entry.component_sum:g}, total is {entry.total:g} (off by {gap:g})")
        grouped.setdefault(entry.node_id, []).append(entry)
    damage = {nid: combine_damage(entries) for nid, entries in sorted(grouped.items())}
    return damage, warnings


def load_damage(ref: str | Path | dict[str, Any] | list[Any],
                node_ids: set[str] | None = None) -> tuple[dict[str, DamageEntry], list[str]]:
    """Load a standalone damage table (``{"damage": [...]}`` or a bare list)."""
    raw = _read_json(ref, DAMAGE_DIR) if isinstance(ref, (str, Path)) else ref
    rows = raw.get("damage", []) if isinstance(raw, dict) else raw
    violations = _validate_damage_rows(rows, node_ids)
    if violations:
        raise TreeViolation(violations)
    damage, warnings = build_damage(rows)
    for w in warnings:
        _log.warning(w)
    return damage, warnings


# ── Construction ──────────────────────────────────────────────────

def _build_node(raw: dict[str, Any]) -> RiskNode:
    gate_raw = raw.get("gate")
    gate = None
    if gate_raw is not None:
        gate = GateSpec(
            kind=gate_raw["kind"],
            mrq=gate_raw.get("mrq", 1),
            mode=gate_raw.get("mode", "ThresholdMean"),
        )
    wc, wa = (float(w) for w in raw.get("ri_weights", DEFAULT_RI_WEIGHTS))
    total = wc + wa
    return RiskNode(
        id=raw["id"],
        label=str(raw.get("label", "")),
        gate=gate,
        children=tuple(raw.get("children", [])),
        detector_bound=bool(raw.get("detector_bound", False)),
        detector_id=raw.get("detector_id"),
        nt=float(raw.get("nt", DEFAULT_NT)),
        policy=normalize_policy(str(raw.get("policy", DEFAULT_POLICY))),  # type: ignore[arg-type]
        ri_weights=(wc / total, wa / total),
    )


def build_tree(raw: dict[str, Any], *, source: str = "<dict>") -> RiskTree:
    """Validate a tree document and construct the frozen ``RiskTree``."""
    violations = validate_tree_dict(raw)
    if violations:
        raise TreeViolation(violations)

    nodes = {n["id"]: _build_node(n) for n in raw["nodes"]}
    root = raw.get("root")
    if root is None:
        parented = {c for n in nodes.values() for c in n.children}
        root = next(nid for nid in nodes if nid not in parented)
    damage, warnings = build_damage(raw.get("damage", []))
    for w in warnings:
        _log.warning("%s: %s", source, w)

    tree = RiskTree(
        nodes=nodes,
        root=root,
        damage=damage,
        tree_id=str(raw.get("tree_id", Path(source).stem)),
        description=str(raw.get("description", "")),
        warnings=tuple(warnings),
    )
    _log.debug("Loaded tree %s: %d node(s), %d damage entr(ies), root %s",
               tree.tree_id, len(nodes), len(damage), root)
    return tree


def _read_json(ref: str | Path, directory: Path = TREES_DIR) -> Any:
    path = Path(ref)
    if not path.exists():
        shipped = directory / f"{ref}.json"
        if not shipped.exists():
            raise FileNotFoundError(f"Definition not found: {ref}")
        path = shipped
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def list_trees() -> list[str]:
    return sorted(p.stem for p in TREES_DIR.glob("*.json"))


def load_tree(definition: str | Path | dict[str, Any]) -> RiskTree:
    """Load a tree from a dict, a JSON file path, or a shipped tree name."""
    if isinstance(definition, dict):
        return build_tree(definition)
    return build_tree(_read_json(definition), source=str(definition))


def with_damage(tree: RiskTree, damage: Mapping[str, DamageEntry]) -> RiskTree:
    """Replace the tree's damage table (used when damage lives in its own file)."""
    dangling = sorted(set(damage) - set(tree.nodes))
    if dangling:
        raise TreeViolation([_violation("DanglingDamageNode", nid, "damage row for an undeclared node")
                             for nid in dangling])
    return replace(tree, damage=dict(damage))
