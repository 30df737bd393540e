"""Detector-confidence persistence: ``{"detector_id": multiplier, ...}`` JSON."""
from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Mapping

_log = logging.getLogger(__name__)


class ConfidenceStateError(ValueError):
    pass


def parse_confidence(raw: object) -> dict[str, float]:
    if not isinstance(raw, dict):
        raise ConfidenceStateError("confidence state must be a JSON object")
    state: dict[str, float] = {}
    for det, value in raw.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not 0 <= value <= 1:
            raise ConfidenceStateError(f"confidence for {det!r} must be a number in [0, 1], got {value!r}")
        state[str(det)] = float(value)
    return state


def load_confidence(path: str | Path) -> dict[str, float]:
    """Read a saved state; a missing file means every detector starts at 1."""
    p = Path(path)
    if not p.exists():
        _log.info("No confidence state at %s; starting fresh", p)
        return {}
    return parse_confidence(json.loads(p.read_text(encoding="utf-8")))


def dump_confidence(state: Mapping[str, float]) -> str:
    return json.dumps(dict(sorted(state.items())), indent=2) + "\n"
