"""Detector alert log parser.

One alert per line, comma-separated:

    timestamp, detector_id, event_id, signature, source, destination,
    severity[, reliability[, achieved/attempted]]

``reliability`` may be empty or omitted and stays ``None`` (the risk
engine treats that as 1).  The optional ninth field carries quorum
ratio evidence such as ``7763/10000``.  Lines starting with ``#`` are
comments.
"""
from __future__ import annotations

import logging
import math
from typing import Iterable, TextIO

from ingest.errors import (
    BadSeverity,
    BadTimestamp,
    MalformedLine,
    ParseResult,
    ReliabilityOutOfRange,
)
from ingest.raw_dataset import parse_timestamp
from schemas.domain import Alert

_log = logging.getLogger(__name__)

MIN_FIELDS = 7
MAX_FIELDS = 9


def parse_evidence(text: str) -> tuple[int, int]:
    """``"7763/10000"`` → ``(7763, 10000)``; 0 ≤ achieved ≤ attempted, attempted > 0."""
    achieved_text, sep, attempted_text = text.partition("/")
    if not sep:
        raise ValueError(f"evidence {text!r} is not achieved/attempted")
    achieved, attempted = int(achieved_text), int(attempted_text)
    if attempted <= 0 or not 0 <= achieved <= attempted:
        raise ValueError(f"evidence {text!r} out of range")
    return achieved, attempted


def parse_alert_log(
    stream: TextIO | Iterable[str],
    *,
    delimiter: str = ",",
    source: str = "<stream>",
) -> ParseResult[Alert]:
    """Parse an alert log; ``records`` come back sorted by timestamp (stable)."""
    result: ParseResult[Alert] = ParseResult(source=source)

    for line_no, line in enumerate(stream, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue

        fields = [f.strip() for f in text.split(delimiter)]
        if not MIN_FIELDS <= len(fields) <= MAX_FIELDS:
            result.errors.append(MalformedLine(
                line_no, f"expected {MIN_FIELDS}-{MAX_FIELDS} fields, got {len(fields)}"))
            continue
        fields += [""] * (MAX_FIELDS - len(fields))
        ts_text, detector, event, signature, src, dst, sev_text, rel_text, ev_text = fields

        try:
            timestamp = parse_timestamp(ts_text)
        except ValueError:
            result.errors.append(BadTimestamp(line_no, repr(ts_text)))
            continue

        try:
            severity = float(sev_text)
            if math.isnan(severity):
                raise ValueError
        except ValueError:
            result.errors.append(BadSeverity(line_no, repr(sev_text)))
            continue

        reliability: float | None = None
        if rel_text:
            try:
                reliability = float(rel_text)
            except ValueError:
                result.errors.append(ReliabilityOutOfRange(line_no, f"{rel_text!r} is not a number"))
                continue
            if not 0.0 <= reliability <= 1.0:
                result.errors.append(ReliabilityOutOfRange(line_no, f"{reliability} not in [0, 1]"))
                continue

        evidence = None
        if ev_text:
            try:
                evidence = parse_evidence(ev_text)
            except ValueError as exc:
                result.errors.append(MalformedLine(line_no, str(exc)))
                continue

        result.records.append(Alert(
            timestamp=timestamp,
            detector_id=detector,
            event_id=event,
            signature=signature,
            source=src,
            destination=dst,
            severity_native=severity,
            reliability=reliability,
            evidence=evidence,
            line_no=line_no,
        ))

    result.records.sort(key=lambda a: a.timestamp)
    if result.errors:
        _log.warning("%s: %d alert line(s) rejected", source, len(result.errors))
    _log.debug("%s: %d alert(s)", source, len(result.records))
    return result
