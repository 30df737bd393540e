"""State paths and consecutive-duplicate compression."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from typing import Iterable

from dqsca.state_db import RawValues


@dataclass(frozen=True)
class PathEntry:
    state_index: int
    timestamp: float
    label: str | None = None
    # Raw selected values; tells an exact duplicate from a quantization merge.
    raw: RawValues | None = field(default=None, compare=False)

    @property
    def key(self) -> tuple[int, str | None]:
        return self.state_index, self.label


@dataclass(frozen=True)
class StatePath:
    """Ordered observed states of one scenario."""
    scenario_id: str
    entries: tuple[PathEntry, ...] = ()
    compressed: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(self.entries))
        for a, b in zip(self.entries, self.entries[1:]):
            if b.timestamp < a.timestamp:
                raise ValueError(
                    f"path {self.scenario_id!r}: timestamps decrease ({a.timestamp} → {b.timestamp})")

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def state_indices(self) -> list[int]:
        return [e.state_index for e in self.entries]


@dataclass(frozen=True)
class CompressionCounts:
    duplicates_removed: int = 0
    rows_combined: int = 0

    @property
    def dropped(self) -> int:
        return self.duplicates_removed + self.rows_combined


def compress_with_counts(path: StatePath, window: float = math.inf) -> tuple[StatePath, CompressionCounts]:
    """``compress_path`` plus a breakdown of why entries were dropped.

    A dropped entry counts as a duplicate when its raw values equal those
    of the last kept entry, otherwise as combined by quantization.
    """
    if window < 0:
        raise ValueError(f"compression window must be non-negative, got {window}")
    kept: list[PathEntry] = []
    duplicates = combined = 0
    for entry in path.entries:
        if kept:
            last = kept[-1]
            if entry.key == last.key and entry.timestamp - last.timestamp <= window:
                if entry.raw is not None and entry.raw == last.raw:
                    duplicates += 1
                else:
                    combined += 1
                continue
        kept.append(entry)
    return (
        replace(path, entries=tuple(kept), compressed=True),
        CompressionCounts(duplicates, combined),
    )


def compress_path(path: StatePath, window: float = math.inf) -> StatePath:
    """Drop entries repeating the last kept (state, label) within *window* seconds."""
    return compress_with_counts(path, window)[0]


def export_paths_csv(paths: Iterable[StatePath]) -> str:
    """``scenario_id,state_index,timestamp,label`` lines, paths in the given order."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["scenario_id", "state_index", "timestamp", "label"])
    for path in paths:
        for e in path.entries:
            writer.writerow([path.scenario_id, e.state_index, repr(float(e.timestamp)),
                             "" if e.label is None else e.label])
    return buf.getvalue()
