# assess.py: SCADA risk toolkit command line
"""Reproducible batch runs over SCADA datasets and detector alert logs.

    python assess.py reduce   --input data.arff --spec turnipseed_v1 --out out/
    python assess.py risk     --tree dos_case_study --alerts alerts.csv --quorum-rounding
    python assess.py metrics  --config metrics.json
    python assess.py validate path/to/file [--kind auto]

Exit codes: 0 success, 1 input error, 2 invariant violation, 3 internal error.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from collections import defaultdict
from pathlib import Path
from typing import Sequence

from alertflow.severity import ScaleViolation, UnregisteredDetector, load_scale
from dqsca.merge import MergeError, MissingPolicy, Stream, merge_streams
from dqsca.pipeline import run_dqsca
from dqsca.quantization import QuantizationError, SpecViolation, load_spec
from dqsca.state_db import StateDatabase, StateDatabaseError
from engine.context import InputError, RunContext, build_context, load_environment, resolve_log_level
from engine.telemetry import RunTelemetry
from hrct.confidence import ConfidenceStateError, dump_confidence, load_confidence
from hrct.loader import TreeViolation, load_damage, load_tree, with_damage
from hrct.propagation import EvalConfig
from hrct.risk import evaluate
from hrct.training import apply_thresholds, train_thresholds
from ingest.alert_log import parse_alert_log
from ingest.arff import parse_arff_dataset
from ingest.errors import IngestViolation
from ingest.raw_dataset import parse_raw_dataset, records_to_rows
from metrics.errors import MetricError, MetricsConfigViolation
from metrics.suite import run_metrics
from metrics.veability import load_assets
from reporting.render import (
    ALL_FORMATS,
    EXTENSION,
    format_money,
    render_metrics,
    render_paths,
    render_reduction,
    render_risk,
    render_states,
)
from reporting.writer import slugify, write_atomic, write_outputs
from schemas.domain import Alert, MeasurementRow
from schemas.taxonomy import ALL_POLICIES, ALL_RI_MODES

_log = logging.getLogger("assess")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INVARIANT = 2
EXIT_INTERNAL = 3

INPUT_ERRORS: tuple[type[BaseException], ...] = (
    InputError, FileNotFoundError, IsADirectoryError, IngestViolation, json.JSONDecodeError,
    UnicodeDecodeError, MergeError, QuantizationError, StateDatabaseError,
    UnregisteredDetector, ConfidenceStateError,
)
INVARIANT_ERRORS: tuple[type[BaseException], ...] = (
    SpecViolation, TreeViolation, ScaleViolation, MetricsConfigViolation, MetricError, ValueError,
)

VALIDATE_KINDS = ("auto", "tree", "damage", "spec", "arff", "raw", "alerts", "assets", "scales")


class _Parser(argparse.ArgumentParser):
    """Usage errors are input errors (exit 1), not argparse's exit 2."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise InputError(f"{self.prog}: {message}")


def _nonneg_float(text: str) -> float:
    value = float(text)
    if math.isnan(value) or value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative number, got {text!r}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="assess", description="SCADA data reduction and HRCT risk assessment")
    p.add_argument("--log-level", metavar="LEVEL", help="DEBUG, INFO, WARNING (default) or ERROR")
    p.add_argument("--log-file", metavar="PATH", help="Write log records (with timestamps) here")
    p.add_argument("--env-file", metavar="PATH", help="Load defaults from this .env file")
    sub = p.add_subparsers(dest="command", required=True)

    def outputs(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--out", metavar="DIR", help="Report directory (default $SCADA_RISK_OUT_DIR or ./out)")
        sp.add_argument("--format", choices=ALL_FORMATS, default="text", help="Report format")

    r = sub.add_parser("reduce", help="Quantize and compress datasets into state paths")
    r.add_argument("--input", action="append", required=True, metavar="FILE",
                   help="ARFF (.arff) or raw Modbus dataset; repeat for several sensors")
    r.add_argument("--spec", required=True, help="Quantization spec file or shipped name")
    r.add_argument("--features", help="Comma-separated selected features (default: the spec's)")
    r.add_argument("--window", type=_nonneg_float, default=math.inf, metavar="SECONDS",
                   help="Compression window (default: unbounded)")
    r.add_argument("--split-by", choices=("none", "label"), default="none",
                   help="Treat each specific-attack label as its own scenario")
    r.add_argument("--state-db", metavar="CSV", help="Existing state database to extend")
    r.add_argument("--on-missing", choices=("hold", "error"), default="hold")
    r.add_argument("--workers", type=_positive_int, default=1)
    outputs(r)

    k = sub.add_parser("risk", help="Evaluate an HRCT against an alert log")
    k.add_argument("--tree", required=True, help="Tree file or shipped name")
    k.add_argument("--alerts", required=True, metavar="FILE")
    k.add_argument("--damage", help="Damage table replacing the tree's own entries")
    k.add_argument("--scales", metavar="JSON", help="Per-detector native severity ranges")
    k.add_argument("--train-alerts", metavar="FILE", help="Training log for per-node NT (needs --scales)")
    k.add_argument("--policy", type=str.lower, choices=[x.lower() for x in ALL_POLICIES],
                   help="Override every node's severity policy (default $SCADA_RISK_POLICY)")
    k.add_argument("--moderate-k", type=_positive_int, default=5)
    k.add_argument("--ri-mode", choices=ALL_RI_MODES, default="weighted")
    k.add_argument("--quorum-rounding", action="store_true",
                   help="Floor QUORUM gate CPs to one decimal")
    k.add_argument("--severity-floor", type=int, default=0, metavar="N")
    k.add_argument("--window", "--correlation-window", dest="window", type=_nonneg_float,
                   default=30.0, metavar="SECONDS", help="Alert correlation window")
    k.add_argument("--no-impute", action="store_true", help="Disable missed-alert imputation")
    k.add_argument("--confidence-state", metavar="JSON",
                   help="Detector confidence file read before and written after the run")
    outputs(k)

    m = sub.add_parser("metrics", help="Compute evaluation metrics")
    m.add_argument("--config", required=True, metavar="JSON", help="Metric suite document")
    m.add_argument("--assets", metavar="JSON", help="Asset profiles for VEA-bility")
    m.add_argument("--risk-report", metavar="JSON", help="Risk report JSON to take event CPs from")
    outputs(m)

    v = sub.add_parser("validate", help="Check input files without writing anything")
    v.add_argument("input", nargs="+", metavar="FILE")
    v.add_argument("--kind", choices=VALIDATE_KINDS, default="auto")
    return p


# ── Logging ───────────────────────────────────────────────────────

def _configure_logging(level: str, log_file: Path | None) -> logging.Handler | None:
    root = logging.getLogger()
    if not root.handlers:
        logging.basicConfig(format="%(levelname)s %(name)s: %(message)s")
    root.setLevel(level)
    if log_file is None:
        return None
    handler = logging.FileHandler(log_file, encoding="utf-8")
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
    root.addHandler(handler)
    return handler


# ── Input helpers ─────────────────────────────────────────────────

def _read_rows(path: Path, sensor_id: str, telemetry: RunTelemetry) -> list[MeasurementRow]:
    with open(path, encoding="utf-8") as f:
        if path.suffix.lower() == ".arff":
            dataset = parse_arff_dataset(f, sensor_id=sensor_id, source=str(path))
            telemetry.records_read += len(dataset.rows) + len(dataset.errors)
            dataset.raise_for_errors()
            return dataset.rows
        parsed = parse_raw_dataset(f, source=str(path))
    telemetry.records_read += len(parsed.records) + len(parsed.errors)
    parsed.raise_for_errors()
    return records_to_rows(parsed.records, sensor_id=sensor_id)


def _sensor_ids(paths: Sequence[Path]) -> list[str]:
    """File stems, suffixed ``#2``, ``#3``... where two inputs share a stem."""
    ids: list[str] = []
    taken = {p.stem for p in paths}
    used: set[str] = set()
    for p in paths:
        sid, n = p.stem, 1
        while sid in used or (sid != p.stem and sid in taken):
            n += 1
            sid = f"{p.stem}#{n}"
        used.add(sid)
        ids.append(sid)
    return ids


def _scenarios(
    streams: list[Stream],
    split_by: str,
    on_missing: MissingPolicy = "hold",
) -> dict[str, list[Stream]]:
    if split_by == "none":
        return {"default": streams}
    merged = merge_streams(streams, on_missing=on_missing)
    grouped: dict[str, list[MeasurementRow]] = defaultdict(list)
    for row in merged:
        grouped[row.labels.specific if row.labels else "unlabeled"].append(row)
    return {label: [(rows[0].sensor_id, rows)] for label, rows in sorted(grouped.items())}


def _read_alerts(path: Path, telemetry: RunTelemetry) -> list[Alert]:
    with open(path, encoding="utf-8") as f:
        parsed = parse_alert_log(f, source=str(path))
    telemetry.records_read += len(parsed.records) + len(parsed.errors)
    telemetry.records_rejected += len(parsed.errors)
    parsed.raise_for_errors()
    return parsed.records


# ── Sub-commands ──────────────────────────────────────────────────

def cmd_reduce(args: argparse.Namespace, ctx: RunContext, telemetry: RunTelemetry) -> int:
    telemetry.start_phase("load")
    spec = load_spec(args.spec)
    features = [f.strip() for f in args.features.split(",")] if args.features else None
    paths = [Path(p) for p in args.input]
    streams: list[Stream] = [
        (sid, _read_rows(p, sid, telemetry)) for p, sid in zip(paths, _sensor_ids(paths))]
    db = None
    if args.state_db:
        db = StateDatabase.from_csv(Path(args.state_db).read_text(encoding="utf-8"),
                                    features=features or spec.selected_features)
    telemetry.end_phase("load")

    telemetry.start_phase("compute")
    scenarios = _scenarios(streams, args.split_by, args.on_missing)
    result = run_dqsca(scenarios, spec, features, args.window, db,
                       on_missing=args.on_missing, workers=args.workers)
    telemetry.end_phase("compute")

    telemetry.start_phase("render")
    files = {
        "states.csv": render_states(result),
        "paths.csv": render_paths(result.paths),
        f"reduction.{EXTENSION[ctx.fmt]}": render_reduction(result, ctx.fmt, spec_tag=spec.tag),  # type: ignore[arg-type]
    }
    telemetry.end_phase("render")

    telemetry.start_phase("write")
    written = write_outputs(ctx.out_dir, files)
    telemetry.outputs_written += len(written)
    telemetry.end_phase("write")

    s = result.stats
    print(f"Reduced {s.original_count} → {s.retained_count} row(s) "
          f"({s.reduction_percent:.2f}%): {s.duplicates_removed} duplicate(s), "
          f"{s.rows_combined} combined; {len(result.db)} state(s)")
    for path in written:
        print(f"  Saved: {path}")
    return EXIT_OK


def cmd_risk(args: argparse.Namespace, ctx: RunContext, telemetry: RunTelemetry) -> int:
    telemetry.start_phase("load")
    tree = load_tree(args.tree)
    if args.damage:
        damage, _ = load_damage(args.damage, node_ids=set(tree.nodes))
        tree = with_damage(tree, damage)
    scale = load_scale(args.scales) if args.scales else None
    alerts = _read_alerts(Path(args.alerts), telemetry)
    if args.train_alerts:
        if scale is None:
            raise InputError("--train-alerts needs --scales to put severities on a common range")
        tree = apply_thresholds(tree, train_thresholds(
            tree, _read_alerts(Path(args.train_alerts), telemetry), scale))
    confidence = load_confidence(args.confidence_state) if args.confidence_state else None
    telemetry.end_phase("load")

    config = EvalConfig(
        policy=ctx.policy,
        moderate_k=args.moderate_k,
        ri_mode=args.ri_mode,
        quorum_rounding=args.quorum_rounding,
        severity_floor=args.severity_floor,
        correlation_window=args.window,
        impute=not args.no_impute,
    )
    telemetry.start_phase("compute")
    report = evaluate(tree, alerts, config, scale=scale, confidence=confidence)
    telemetry.end_phase("compute")

    telemetry.start_phase("render")
    name = f"risk_{slugify(tree.tree_id)}.{EXTENSION[ctx.fmt]}"
    text = render_risk(report, ctx.fmt)  # type: ignore[arg-type]
    telemetry.end_phase("render")

    telemetry.start_phase("write")
    written = [write_atomic(ctx.out_dir / name, text)]
    if args.confidence_state:
        written.append(write_atomic(args.confidence_state, dump_confidence(report.confidence)))
    telemetry.outputs_written += len(written)
    telemetry.end_phase("write")

    for d in report.diagnostics:
        print(f"  ⚠ {d['kind']}: {d['detail']}", file=sys.stderr)
    print(f"Root CP: {report.root_cp:g}")
    print(f"R_total: {format_money(report.total)}")
    for path in written:
        print(f"  Saved: {path}")
    return EXIT_OK


def cmd_metrics(args: argparse.Namespace, ctx: RunContext, telemetry: RunTelemetry) -> int:
    telemetry.start_phase("load")
    config_path = Path(args.config)
    raw = json.loads(config_path.read_text(encoding="utf-8"))
    assets = load_assets(args.assets, args.risk_report) if args.assets else None
    telemetry.end_phase("load")

    telemetry.start_phase("compute")
    rows = run_metrics(raw, config_path.parent, assets=assets)
    telemetry.end_phase("compute")

    telemetry.start_phase("render")
    text = render_metrics(rows, ctx.fmt)  # type: ignore[arg-type]
    telemetry.end_phase("render")

    telemetry.start_phase("write")
    path = write_atomic(ctx.out_dir / f"metrics.{EXTENSION[ctx.fmt]}", text)
    telemetry.outputs_written += 1
    telemetry.end_phase("write")

    print(render_metrics(rows, "text"), end="")
    print(f"  Saved: {path}")
    return EXIT_OK


# ── validate ──────────────────────────────────────────────────────

def detect_kind(path: Path) -> str:
    """Best guess at a file's kind from its extension and content."""
    suffix = path.suffix.lower()
    if suffix == ".arff":
        return "arff"
    if suffix == ".json":
        raw = json.loads(path.read_text(encoding="utf-8"))
        if isinstance(raw, list):
            return "damage"
        if not isinstance(raw, dict):
            raise InputError(f"{path}: cannot tell what kind of document this is")
        for key, kind in (("nodes", "tree"), ("features", "spec"), ("assets", "assets"),
                          ("detectors", "scales"), ("damage", "damage")):
            if key in raw:
                return kind
        raise InputError(f"{path}: cannot tell what kind of document this is; pass --kind")
    with open(path, encoding="utf-8") as f:
        for line in f:
            text = line.strip()
            if text and not text.startswith("#"):
                return "raw" if len(text.split(",")) == 6 else "alerts"
    return "alerts"


def _validate_one(path: Path, kind: str) -> list[str]:
    """Raise on errors; return warnings."""
    if kind == "auto":
        kind = detect_kind(path)
    warnings: list[str] = []
    if kind == "tree":
        warnings.extend(load_tree(path).warnings)
    elif kind == "damage":
        warnings.extend(load_damage(path)[1])
    elif kind == "spec":
        load_spec(path)
    elif kind == "scales":
        load_scale(path)
    elif kind == "assets":
        load_assets(path)
    elif kind == "arff":
        with open(path, encoding="utf-8") as f:
            parse_arff_dataset(f, source=str(path)).raise_for_errors()
    elif kind == "raw":
        with open(path, encoding="utf-8") as f:
            parse_raw_dataset(f, source=str(path)).raise_for_errors()
    else:
        with open(path, encoding="utf-8") as f:
            parse_alert_log(f, source=str(path)).raise_for_errors()
    print(f"✓ {path} ({kind})")
    return warnings


def cmd_validate(args: argparse.Namespace, ctx: RunContext, telemetry: RunTelemetry) -> int:
    worst = EXIT_OK
    for name in args.input:
        try:
            for w in _validate_one(Path(name), args.kind):
                print(f"  ⚠ {w}")
        except Exception as exc:
            code = _exit_code(exc)
            print(f"✗ {name}: {exc}", file=sys.stderr)
            worst = max(worst, code)
    return worst


COMMANDS = {
    "reduce": cmd_reduce,
    "risk": cmd_risk,
    "metrics": cmd_metrics,
    "validate": cmd_validate,
}


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, INPUT_ERRORS):
        return EXIT_INPUT
    if isinstance(exc, INVARIANT_ERRORS):
        return EXIT_INVARIANT
    _log.exception("Internal error")
    return EXIT_INTERNAL


def main(argv: Sequence[str] | None = None) -> int:
    handler = None
    try:
        args = build_parser().parse_args(argv)
        load_environment(args.env_file)
        handler = _configure_logging(resolve_log_level(args.log_level),
                                     Path(args.log_file) if args.log_file else None)
        ctx = build_context(args)
        _log.info("Run context: %s", ctx.to_dict())
        telemetry = RunTelemetry(command=args.command)
        code = COMMANDS[args.command](args, ctx, telemetry)
        telemetry.log()
        return code
    except Exception as exc:
        code = _exit_code(exc)
        if code != EXIT_INTERNAL:
            print(f"error: {exc}", file=sys.stderr)
        else:
            print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return code
    finally:
        if handler is not None:
            logging.getLogger().removeHandler(handler)
            handler.close()


if __name__ == "__main__":
    sys.exit(main())
