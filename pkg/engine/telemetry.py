"""Runtime telemetry for one CLI run.

Collects per-phase durations and record counts.  Emitted through the
logger only; report files never carry timings.
"""
from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field
from typing import Any

_log = logging.getLogger(__name__)

PHASES: tuple[str, ...] = ("load", "compute", "render", "write")


@dataclass
class RunTelemetry:
    """Accumulates timings and counts throughout a single run."""

    command: str = ""

    # Record counts
    records_read: int = 0
    records_rejected: int = 0
    outputs_written: int = 0

    # Phase timing (seconds)
    phase_load_sec: float = 0.0
    phase_compute_sec: float = 0.0
    phase_render_sec: float = 0.0
    phase_write_sec: float = 0.0
    run_duration_sec: float = 0.0

    _phase_starts: dict[str, float] = field(default_factory=dict, repr=False)
    _run_start: float = field(default_factory=time.perf_counter, repr=False)

    def start_phase(self, name: str) -> None:
        self._phase_starts[name] = time.perf_counter()

    def end_phase(self, name: str) -> None:
        start = self._phase_starts.pop(name, None)
        if start is not None:
            attr = f"phase_{name}_sec"
            if hasattr(self, attr):
                setattr(self, attr, round(time.perf_counter() - start, 4))

    def finish(self) -> None:
        self.run_duration_sec = round(time.perf_counter() - self._run_start, 4)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d.pop("_phase_starts", None)
        d.pop("_run_start", None)
        return d

    def summary_lines(self) -> list[str]:
        phases = "  ".join(f"{p}={getattr(self, f'phase_{p}_sec')}s" for p in PHASES)
        return [
            f"Records:  {self.records_read} read, {self.records_rejected} rejected",
            f"Outputs:  {self.outputs_written} written",
            f"Phases:   {phases}",
            f"Total:    {self.run_duration_sec}s",
        ]

    def log(self) -> None:
        self.finish()
        for line in self.summary_lines():
            _log.info("[%s] %s", self.command, line)
