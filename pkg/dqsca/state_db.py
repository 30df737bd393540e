"""Unique system-state database shared across scenarios.

Each distinct quantized code vector gets one ``SystemState`` whose index
is assigned in first-seen order.  The database also keeps, per state,
the distinct raw value tuples of the rows retained under it so that a
threshold refresh can rebuild the states without the original files.
"""
from __future__ import annotations

import csv
import io
import logging
import threading
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

from schemas.domain import Scalar

_log = logging.getLogger(__name__)

CodeVector = tuple[int, ...]
RawValues = tuple[Scalar, ...]


@dataclass(frozen=True)
class SystemState:
    index: int
    code_vector: CodeVector

    @property
    def codes(self) -> str:
        return ",".join(str(c) for c in self.code_vector)


class StateDatabaseError(ValueError):
    pass


class StateDatabase:
    """code_vector ↔ index bijection with monotonically assigned indices."""

    def __init__(self, start_index: int = 0, features: Sequence[str] = ()) -> None:
        if start_index < 0:
            raise StateDatabaseError(f"start index must be non-negative, got {start_index}")
        self.start_index = start_index
        self.next_index = start_index
        self.features: tuple[str, ...] = tuple(features)
        self._by_vector: dict[CodeVector, SystemState] = {}
        self._by_index: dict[int, SystemState] = {}
        self._raw: dict[int, dict[RawValues, None]] = {}
        self._lock = threading.Lock()

    # ── Read access ────────────────────────────────────────────────

    @property
    def states(self) -> Mapping[CodeVector, SystemState]:
        return dict(self._by_vector)

    def __len__(self) -> int:
        return len(self._by_vector)

    def __contains__(self, code_vector: object) -> bool:
        return code_vector in self._by_vector

    def __iter__(self) -> Iterator[SystemState]:
        return iter(sorted(self._by_index.values(), key=lambda s: s.index))

    def get(self, code_vector: CodeVector) -> SystemState | None:
        return self._by_vector.get(tuple(code_vector))

    def by_index(self, index: int) -> SystemState:
        return self._by_index[index]

    def raw_values(self, index: int) -> list[RawValues]:
        return list(self._raw.get(index, {}))

    # ── Mutation ───────────────────────────────────────────────────

    def map(self, code_vector: Sequence[int]) -> SystemState:
        key = tuple(code_vector)
        with self._lock:
            state = self._by_vector.get(key)
            if state is None:
                state = SystemState(index=self.next_index, code_vector=key)
                self._by_vector[key] = state
                self._by_index[state.index] = state
                self.next_index += 1
            return state

    def record_raw(self, index: int, raw: RawValues) -> None:
        with self._lock:
            self._raw.setdefault(index, {})[tuple(raw)] = None

    # ── Export / import ────────────────────────────────────────────

    def export_csv(self) -> str:
        """``index,code_vector`` lines in index order (code vector quoted)."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["index", "code_vector"])
        for state in self:
            writer.writerow([state.index, state.codes])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, *, features: Sequence[str] = ()) -> "StateDatabase":
        """Rebuild a database from ``export_csv`` output.

        Raw value tuples are not part of the export, so a database loaded
        this way can be extended but its imported states cannot be
        re-quantized.
        """
        reader = csv.reader(io.StringIO(text))
        rows = [r for r in reader if r]
        if rows and rows[0] == ["index", "code_vector"]:
            rows = rows[1:]
        parsed: list[SystemState] = []
        for line_no, row in enumerate(rows, start=2):
            if len(row) != 2:
                raise StateDatabaseError(f"line {line_no}: expected 2 fields, got {len(row)}")
            try:
                index = int(row[0])
                vector = tuple(int(c) for c in row[1].split(",")) if row[1] else ()
            except ValueError:
                raise StateDatabaseError(f"line {line_no}: non-integer field in {row}") from None
            parsed.append(SystemState(index, vector))

        start = min((s.index for s in parsed), default=0)
        db = cls(start_index=start, features=features)
        for s in sorted(parsed, key=lambda s: s.index):
            if s.code_vector in db._by_vector:
                raise StateDatabaseError(f"code vector {s.codes} appears twice")
            if s.index in db._by_index:
                raise StateDatabaseError(f"index {s.index} appears twice")
            db._by_vector[s.code_vector] = s
            db._by_index[s.index] = s
        db.next_index = max(db._by_index, default=start - 1) + 1
        _log.debug("Imported %d state(s), next index %d", len(db), db.next_index)
        return db


def map_to_state(code_vector: Sequence[int], db: StateDatabase) -> SystemState:
    """Existing state for *code_vector*, or a new one at ``db.next_index``."""
    return db.map(code_vector)
