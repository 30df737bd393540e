"""Time alignment of multi-sensor measurement streams.

The stream with the highest sampling frequency is the baseline; every
other stream is carried forward onto the baseline timestamps
(last observation at or before each baseline timestamp).  Values are
never interpolated.

    merged = merge_streams([("s1", rows_s1), ("s2", rows_s2)])
"""
from __future__ import annotations

import logging
import math
from typing import Literal, Sequence

import pandas as pd

from schemas.domain import MeasurementRow, Scalar

_log = logging.getLogger(__name__)

MissingPolicy = Literal["hold", "error"]

Stream = tuple[str, Sequence[MeasurementRow]]


class MergeError(ValueError):
    pass


class NoStreams(MergeError):
    """Every input stream is empty (or there are none)."""


class NoPriorSample(MergeError):
    """A baseline timestamp precedes every sample of another sensor."""


class UnsortedStream(MergeError):
    pass


class DuplicateSensorId(MergeError):
    pass


def sampling_frequency(rows: Sequence[MeasurementRow]) -> float:
    """(count − 1) / (last − first).  A single sample has frequency 0."""
    if len(rows) < 2:
        return 0.0
    span = rows[-1].timestamp - rows[0].timestamp
    return math.inf if span <= 0 else (len(rows) - 1) / span


def select_baseline(streams: Sequence[Stream]) -> str:
    """Sensor id of the highest-frequency non-empty stream (ties → lowest id)."""
    candidates = [(sid, rows) for sid, rows in streams if rows]
    if not candidates:
        raise NoStreams("no non-empty measurement stream to merge")
    return min(candidates, key=lambda c: (-sampling_frequency(c[1]), c[0]))[0]


def _feature_names(rows: Sequence[MeasurementRow]) -> list[str]:
    names: dict[str, None] = {}
    for r in rows:
        names.update(dict.fromkeys(r.values))
    return list(names)


def _check_sorted(sensor_id: str, rows: Sequence[MeasurementRow]) -> None:
    if any(b.timestamp < a.timestamp for a, b in zip(rows, rows[1:])):
        raise UnsortedStream(f"stream {sensor_id!r} is not sorted by timestamp")


def _asof_positions(base_ts: pd.DataFrame, rows: Sequence[MeasurementRow]) -> list[int | None]:
    """For each baseline timestamp, index of the latest row at or before it."""
    other = pd.DataFrame({
        "timestamp": [float(r.timestamp) for r in rows],
        "_pos": range(len(rows)),
    })
    joined = pd.merge_asof(base_ts, other, on="timestamp", direction="backward")
    return [None if pd.isna(p) else int(p) for p in joined["_pos"]]


def merge_streams(
    streams: Sequence[Stream],
    *,
    on_missing: MissingPolicy = "hold",
) -> list[MeasurementRow]:
    """Align every stream onto the baseline sensor's timestamps.

    Output rows keep the baseline's values and labels; each other sensor
    (in sensor-id order) fills only feature names the row does not hold
    yet.  Before a sensor's first sample its features are ``None`` under
    ``on_missing="hold"``; ``"error"`` raises ``NoPriorSample`` instead.
    Sensor ids must be unique across *streams*.
    """
    seen: set[str] = set()
    for sid, rows in streams:
        if sid in seen:
            raise DuplicateSensorId(f"sensor id {sid!r} names more than one stream")
        seen.add(sid)
        _check_sorted(sid, rows)
    baseline_id = select_baseline(streams)
    by_id = {sid: rows for sid, rows in streams}
    baseline = by_id[baseline_id]
    others = sorted((sid, rows) for sid, rows in by_id.items() if sid != baseline_id and rows)

    if not others:
        return list(baseline)

    _log.debug("Merging %d stream(s) onto baseline %s (%d row(s))",
               len(others) + 1, baseline_id, len(baseline))

    base_ts = pd.DataFrame({"timestamp": [float(r.timestamp) for r in baseline]})
    carried = [(sid, rows, _feature_names(rows), _asof_positions(base_ts, rows))
               for sid, rows in others]
    merged_id = "+".join([baseline_id, *(sid for sid, _ in others)])

    merged: list[MeasurementRow] = []
    absent_count = 0
    for i, row in enumerate(baseline):
        values: dict[str, Scalar] = dict(row.values)
        labels = row.labels
        for sid, rows, names, positions in carried:
            pos = positions[i]
            if pos is None:
                if on_missing == "error":
                    raise NoPriorSample(
                        f"baseline {baseline_id} at t={row.timestamp} precedes "
                        f"every sample of sensor {sid!r}")
                absent_count += 1
                for name in names:
                    values.setdefault(name, None)
                continue
            source = rows[pos]
            for name in names:
                if name not in values:
                    values[name] = source.values.get(name)
            if labels is None:
                labels = source.labels
        merged.append(MeasurementRow(
            values=values, timestamp=row.timestamp, labels=labels, sensor_id=merged_id))

    if absent_count:
        _log.info("%d sensor value group(s) held absent before first sample", absent_count)
    return merged
