"""Run context: command-line flags resolved against the environment.

Environment defaults (a ``.env`` file in the working directory is loaded
first; real environment variables win):

    SCADA_RISK_LOG_LEVEL   default log level           (WARNING)
    SCADA_RISK_OUT_DIR     default report directory    (./out)
    SCADA_RISK_POLICY      default severity policy     (per-node)
"""
from __future__ import annotations

import argparse
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from dotenv import load_dotenv

from dqsca.quantization import SPECS_DIR
from hrct.loader import DAMAGE_DIR, TREES_DIR
from schemas.taxonomy import SeverityPolicy, normalize_policy

ENV_LOG_LEVEL = "SCADA_RISK_LOG_LEVEL"
ENV_OUT_DIR = "SCADA_RISK_OUT_DIR"
ENV_POLICY = "SCADA_RISK_POLICY"

DEFAULT_LOG_LEVEL = "WARNING"
DEFAULT_OUT_DIR = "out"


class InputError(Exception):
    """A referenced input is missing or a flag value is unusable."""


@dataclass(frozen=True)
class RunContext:
    command: str
    out_dir: Path
    fmt: str = "text"
    log_level: str = DEFAULT_LOG_LEVEL
    log_file: Path | None = None
    policy: SeverityPolicy | None = None
    inputs: dict[str, Path] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "out_dir": str(self.out_dir),
            "format": self.fmt,
            "log_level": self.log_level,
            "policy": self.policy,
            "inputs": {k: str(v) for k, v in sorted(self.inputs.items())},
        }


def load_environment(env_file: str | Path | None = None) -> None:
    load_dotenv(dotenv_path=env_file, override=False)


def resolve_log_level(flag: str | None) -> str:
    level = (flag or os.environ.get(ENV_LOG_LEVEL) or DEFAULT_LOG_LEVEL).upper()
    if not isinstance(logging.getLevelName(level), int):
        raise InputError(f"unknown log level {level!r}")
    return level


def resolve_policy(flag: str | None) -> SeverityPolicy | None:
    text = flag or os.environ.get(ENV_POLICY)
    if not text:
        return None
    try:
        return normalize_policy(text)
    except ValueError as exc:
        raise InputError(str(exc)) from None


# flag name → argparse attribute holding an input path
INPUT_FLAGS: tuple[str, ...] = (
    "input", "spec", "tree", "alerts", "damage", "scales", "train_alerts",
    "state_db", "config", "assets", "risk_report",
)


def build_context(args: argparse.Namespace) -> RunContext:
    """Resolve flags + environment and check that every input path exists."""
    inputs: dict[str, Path] = {}
    missing: list[str] = []
    for name in INPUT_FLAGS:
        value = getattr(args, name, None)
        if value is None:
            continue
        values = value if isinstance(value, list) else [value]
        for i, v in enumerate(values):
            path = Path(v)
            if not path.exists() and not _is_shipped(name, v):
                missing.append(f"--{name.replace('_', '-')} {v}")
            inputs[name if len(values) == 1 else f"{name}[{i}]"] = path
    if missing:
        raise InputError("input not found: " + ", ".join(missing))

    out = getattr(args, "out", None) or os.environ.get(ENV_OUT_DIR) or DEFAULT_OUT_DIR
    return RunContext(
        command=args.command,
        out_dir=Path(out),
        fmt=getattr(args, "format", None) or "text",
        log_level=resolve_log_level(getattr(args, "log_level", None)),
        log_file=Path(args.log_file) if getattr(args, "log_file", None) else None,
        policy=resolve_policy(getattr(args, "policy", None)),
        inputs=inputs,
    )


def _is_shipped(flag: str, value: str) -> bool:
    """Trees, damage tables and quantization specs may be named by shipped id."""
    directory = {"tree": TREES_DIR, "damage": DAMAGE_DIR, "spec": SPECS_DIR}.get(flag)
    return directory is not None and (directory / f"{value}.json").exists()
