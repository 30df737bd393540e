# dqsca/pipeline.py: merge → quantize → map → compress.
"""Full data-reduction pipeline.

┌─────────────────────────────────────────────────────────────────┐
│  per scenario (pure, may run in a worker pool)                  │
│    merge_streams → quantize_row for every merged row            │
│                                                                 │
│  single-threaded, deterministic                                 │
│    new code vectors inserted into the StateDatabase ordered by  │
│    (first-seen timestamp, code vector) → paths → compress_path  │
└─────────────────────────────────────────────────────────────────┘

Insertion order does not depend on the worker count, so identical
inputs always produce identical state indices.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from dqsca.compression import PathEntry, StatePath, compress_with_counts
from dqsca.merge import MissingPolicy, Stream, merge_streams
from dqsca.quantization import QuantizationSpec, quantize_row, quantize_value
from dqsca.state_db import CodeVector, RawValues, StateDatabase

_log = logging.getLogger(__name__)

DEFAULT_SCENARIO = "default"


# ── Reduction statistics ──────────────────────────────────────────

@dataclass(frozen=True)
class ReductionStats:
    original_count: int
    retained_count: int
    duplicates_removed: int = 0
    rows_combined: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.retained_count <= self.original_count:
            raise ValueError(
                f"retained {self.retained_count} outside [0, {self.original_count}]")
        if self.duplicates_removed + self.rows_combined != self.original_count - self.retained_count:
            raise ValueError(
                f"duplicates ({self.duplicates_removed}) + combined ({self.rows_combined}) "
                f"must equal original − retained ({self.original_count - self.retained_count})")

    @classmethod
    def from_counts(
        cls,
        original: int,
        retained: int,
        duplicates: int = 0,
        combined: int | None = None,
    ) -> "ReductionStats":
        """Build from reported totals; ``combined`` defaults to the remainder."""
        if combined is None:
            combined = original - retained - duplicates
        return cls(original, retained, duplicates, combined)

    @property
    def reduction_percent(self) -> float:
        if self.original_count == 0:
            return 0.0
        return (self.original_count - self.retained_count) / self.original_count * 100

    def __add__(self, other: "ReductionStats") -> "ReductionStats":
        return ReductionStats(
            self.original_count + other.original_count,
            self.retained_count + other.retained_count,
            self.duplicates_removed + other.duplicates_removed,
            self.rows_combined + other.rows_combined,
        )

    def as_dict(self) -> dict[str, Any]:
        return {
            "original_count": self.original_count,
            "retained_count": self.retained_count,
            "duplicates_removed": self.duplicates_removed,
            "rows_combined": self.rows_combined,
            "reduction_percent": round(self.reduction_percent, 2),
        }


@dataclass
class DqscaResult:
    db: StateDatabase
    paths: list[StatePath]
    stats: ReductionStats
    per_scenario: dict[str, ReductionStats] = field(default_factory=dict)

    def __iter__(self):
        # ``db, paths, stats = run_dqsca(...)``
        return iter((self.db, self.paths, self.stats))


# ── Stages ────────────────────────────────────────────────────────

@dataclass
class _Quantized:
    scenario_id: str
    timestamps: list[float]
    labels: list[str | None]
    vectors: list[CodeVector]
    raws: list[RawValues]


def _quantize_scenario(
    scenario_id: str,
    streams: Sequence[Stream],
    spec: QuantizationSpec,
    features: Sequence[str],
    on_missing: MissingPolicy,
) -> _Quantized:
    rows = merge_streams(streams, on_missing=on_missing)
    q = _Quantized(scenario_id, [], [], [], [])
    for row in rows:
        q.timestamps.append(row.timestamp)
        q.labels.append(row.labels.specific if row.labels else None)
        q.vectors.append(quantize_row(row, spec, features))
        q.raws.append(tuple(row.values.get(f) for f in features))
    return q


def _insert_new_states(db: StateDatabase, quantized: Sequence[_Quantized]) -> int:
    first_seen: dict[CodeVector, float] = {}
    for q in quantized:
        for ts, vec in zip(q.timestamps, q.vectors):
            if vec not in db and (vec not in first_seen or ts < first_seen[vec]):
                first_seen[vec] = ts
    for vec in sorted(first_seen, key=lambda v: (first_seen[v], v)):
        db.map(vec)
    return len(first_seen)


def _normalize_scenarios(
    scenarios: Mapping[str, Sequence[Stream]] | Sequence[Stream],
) -> dict[str, Sequence[Stream]]:
    if isinstance(scenarios, Mapping):
        return dict(scenarios)
    return {DEFAULT_SCENARIO: scenarios}


# ── Public API ────────────────────────────────────────────────────

def run_dqsca(
    scenarios: Mapping[str, Sequence[Stream]] | Sequence[Stream],
    spec: QuantizationSpec,
    selected_features: Sequence[str] | None = None,
    window: float = math.inf,
    db: StateDatabase | None = None,
    *,
    on_missing: MissingPolicy = "hold",
    workers: int = 1,
) -> DqscaResult:
    """Reduce every scenario to a compressed state path over a shared database.

    *scenarios* maps scenario id → list of ``(sensor_id, rows)`` streams;
    a bare stream list is treated as the single scenario ``"default"``.
    ``original_count`` counts merged (time-aligned) rows.
    """
    features = tuple(selected_features if selected_features is not None else spec.selected_features)
    by_scenario = _normalize_scenarios(scenarios)
    if db is None:
        db = StateDatabase(features=features)
    elif not db.features:
        db.features = features
    elif db.features != features:
        raise ValueError(f"state database was built over {list(db.features)}, not {list(features)}")

    if workers > 1 and len(by_scenario) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_quantize_scenario, sid, streams, spec, features, on_missing)
                for sid, streams in by_scenario.items()
            ]
            quantized = [f.result() for f in futures]
    else:
        quantized = [
            _quantize_scenario(sid, streams, spec, features, on_missing)
            for sid, streams in by_scenario.items()
        ]

    inserted = _insert_new_states(db, quantized)

    paths: list[StatePath] = []
    per_scenario: dict[str, ReductionStats] = {}
    for q in quantized:
        path = StatePath(q.scenario_id, tuple(
            PathEntry(db.get(vec).index, ts, label, raw)
            for ts, label, vec, raw in zip(q.timestamps, q.labels, q.vectors, q.raws)
        ))
        compressed, counts = compress_with_counts(path, window)
        for e in compressed.entries:
            db.record_raw(e.state_index, e.raw)
        paths.append(compressed)
        per_scenario[q.scenario_id] = ReductionStats(
            len(path), len(compressed), counts.duplicates_removed, counts.rows_combined)

    total = sum(per_scenario.values(), ReductionStats(0, 0))
    _log.info("DQSCA: %d scenario(s), %d → %d row(s) (%.2f%%), %d new state(s), %d total",
              len(paths), total.original_count, total.retained_count,
              total.reduction_percent, inserted, len(db))
    return DqscaResult(db=db, paths=paths, stats=total, per_scenario=per_scenario)


def refresh_quantization(
    db: StateDatabase,
    spec: QuantizationSpec,
    new_thresholds: Mapping[str, Sequence[float] | Mapping[str, Any]],
) -> tuple[StateDatabase, QuantizationSpec, dict[int, tuple[int, ...]]]:
    """Swap in new thresholds and rebuild the states from retained raw rows.

    Returns ``(new_db, new_spec, remap)`` where ``remap[old_index]`` lists
    the new indices its retained rows landed in.  Old states are replayed
    in index order, so unchanged thresholds give the identity remap.
    Imported states without raw rows map to an empty tuple.
    """
    new_spec = spec.with_thresholds(new_thresholds)
    features = db.features or new_spec.selected_features
    new_db = StateDatabase(start_index=db.start_index, features=features)
    remap: dict[int, tuple[int, ...]] = {}
    orphans = 0

    for state in db:
        raws = db.raw_values(state.index)
        if not raws:
            orphans += 1
        targets: dict[int, None] = {}
        for raw in raws:
            row_values = dict(zip(features, raw))
            vec = tuple(quantize_value(row_values[name], new_spec[name]) for name in features)
            new_state = new_db.map(vec)
            new_db.record_raw(new_state.index, raw)
            targets[new_state.index] = None
        remap[state.index] = tuple(sorted(targets))

    if orphans:
        _log.warning("%d imported state(s) carry no raw rows and were not rebuilt", orphans)
    _log.info("Quantization refreshed: %d → %d state(s)", len(db), len(new_db))
    return new_db, new_spec, remap
