"""Report renderers: text (jinja2), CSV and JSON.

Every renderer is a pure function of its inputs, so identical inputs give
byte-identical output.  Nothing here reads the clock.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from typing import Any, Iterable, Literal, Sequence, get_args

from jinja2 import Environment, FileSystemLoader, StrictUndefined, select_autoescape

from dqsca.compression import StatePath, export_paths_csv
from dqsca.pipeline import DqscaResult
from hrct.risk import RiskReport
from metrics.suite import MetricRow

OutputFormat = Literal["text", "csv", "json"]
ALL_FORMATS: tuple[str, ...] = get_args(OutputFormat)
EXTENSION: dict[str, str] = {"text": "txt", "csv": "csv", "json": "json"}

assert set(EXTENSION) == set(ALL_FORMATS)

TEMPLATE_DIR = os.path.join(os.path.dirname(__file__), "templates")


# ── Number formatting ─────────────────────────────────────────────

def format_money(value: float | None) -> str:
    """Two decimals, trailing zeros stripped: 1950.0 → "1950", 2064.45 → "2064.45"."""
    if value is None:
        return ""
    text = f"{value:.2f}".rstrip("0").rstrip(".")
    return "0" if text in ("-0", "") else text


def format_number(value: float | None, places: int = 4) -> str:
    if value is None:
        return ""
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    text = f"{value:.{places}f}"
    return "0" if float(text) == 0 else text


def _env() -> Environment:
    env = Environment(
        loader=FileSystemLoader(TEMPLATE_DIR),
        autoescape=select_autoescape(["html", "xml"], default_for_string=False, default=False),
        undefined=StrictUndefined,
        keep_trailing_newline=True,
        trim_blocks=True,
        lstrip_blocks=True,
    )
    env.filters["money"] = format_money
    env.filters["num"] = format_number
    return env


def _render_template(name: str, **context: Any) -> str:
    return _env().get_template(name).render(**context)


def _csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _json(payload: Any) -> str:
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def _check_format(fmt: str) -> None:
    if fmt not in ALL_FORMATS:
        raise ValueError(f"unknown output format {fmt!r}; expected one of {', '.join(ALL_FORMATS)}")


# ── Risk ──────────────────────────────────────────────────────────

def render_risk(report: RiskReport, fmt: OutputFormat = "text") -> str:
    _check_format(fmt)
    if fmt == "json":
        return _json(report.as_dict())
    if fmt == "csv":
        rows = [
            (r.node_id, format_number(r.cp), format_money(r.asset_value),
             format_money(r.risk) if r.asset_value is not None else "")
            for r in report.rows()
        ]
        rows.append(("R_total", "", "", format_money(report.total)))
        return _csv(("node_id", "cp", "asset_value", "risk"), rows)
    return _render_template("risk.txt.j2", report=report, rows=report.rows())


# ── Reduce ────────────────────────────────────────────────────────

def render_reduction(result: DqscaResult, fmt: OutputFormat = "text", *, spec_tag: str = "") -> str:
    _check_format(fmt)
    scenarios = sorted(result.per_scenario.items())
    if fmt == "json":
        return _json({
            "spec": spec_tag,
            "state_count": len(result.db),
            "totals": result.stats.as_dict(),
            "scenarios": {sid: stats.as_dict() for sid, stats in scenarios},
        })
    if fmt == "csv":
        rows = [
            (sid, s.original_count, s.retained_count, s.duplicates_removed, s.rows_combined,
             format_number(s.reduction_percent, 2))
            for sid, s in [*scenarios, ("TOTAL", result.stats)]
        ]
        return _csv(("scenario_id", "original_count", "retained_count", "duplicates_removed",
                     "rows_combined", "reduction_percent"), rows)
    return _render_template("reduce.txt.j2", result=result, scenarios=scenarios,
                            spec_tag=spec_tag, state_count=len(result.db))


def render_states(result: DqscaResult) -> str:
    return result.db.export_csv()


def render_paths(paths: Sequence[StatePath]) -> str:
    return export_paths_csv(paths)


# ── Metrics ───────────────────────────────────────────────────────

def render_metrics(rows: Sequence[MetricRow], fmt: OutputFormat = "text") -> str:
    _check_format(fmt)
    if fmt == "json":
        return _json([{"metric": r.metric, "subject": r.subject, "value": r.value} for r in rows])
    if fmt == "csv":
        return _csv(("metric", "subject", "value"),
                    ((r.metric, r.subject, format_number(r.value)) for r in rows))
    width = max((len(r.metric) for r in rows), default=0)
    return _render_template("metrics.txt.j2", rows=rows, width=width)
