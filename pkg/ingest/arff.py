"""ARFF-subset reader and writer.

Supported subset (a column container, not the full standard):

    % comment
    @relation <name>
    @attribute <name> integer | real | numeric | string | {v1,v2,...}
    @data
    v1,v2,...,vn

No sparse rows, no relational or date attributes, no quoting inside
data tokens beyond stripping one pair of surrounding quotes.  ``?`` is
a missing value and parses to ``None``.

The last four declared attributes are, in order: timestamp, specific
attack, category attack, binary attack.  They are split out of
``MeasurementRow.values`` into ``timestamp`` and ``labels``.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Iterable, TextIO

from ingest.errors import (
    ArffHeaderError,
    BadTimestamp,
    HeaderDataArityMismatch,
    IngestError,
    IngestViolation,
    NonNumericValueForNumericAttribute,
    UndeclaredAttribute,
)
from ingest.raw_dataset import parse_timestamp
from schemas.domain import AttackLabels, FeatureSchema, FeatureSpec, MeasurementRow, Scalar
from schemas.taxonomy import NUMERIC_KINDS

_log = logging.getLogger(__name__)

MISSING = "?"
_LABEL_TAIL = 4  # timestamp, specific, category, binary

_ATTRIBUTE_RE = re.compile(
    r"""^@attribute\s+
        (?P<name>'[^']*'|"[^"]*"|\S+)\s+
        (?P<type>.+?)\s*$""",
    re.IGNORECASE | re.VERBOSE,
)
_BOOLEAN_SETS = ({"0", "1"}, {"false", "true"})


@dataclass
class ArffDataset:
    """Parsed ARFF subset: schema, rows in file order, per-line errors."""
    schema: FeatureSchema
    rows: list[MeasurementRow] = field(default_factory=list)
    errors: list[IngestError] = field(default_factory=list)
    relation: str = "dataset"
    source: str = "<stream>"

    def __iter__(self):
        # allows ``schema, rows = parse_arff_dataset(...)``
        return iter((self.schema, self.rows))

    def raise_for_errors(self) -> None:
        if self.errors:
            raise IngestViolation(self.source, self.errors)


def _unquote(token: str) -> str:
    token = token.strip()
    if len(token) >= 2 and token[0] == token[-1] and token[0] in "'\"":
        return token[1:-1]
    return token


def _feature_from_type(name: str, type_text: str, line_no: int) -> FeatureSpec:
    t = type_text.strip()
    lowered = t.lower()
    if lowered == "integer":
        return FeatureSpec(name, "integer")
    if lowered in ("real", "numeric"):
        return FeatureSpec(name, "real")
    if lowered == "string":
        return FeatureSpec(name, "categorical")
    if t.startswith("{") and t.endswith("}"):
        values = tuple(_unquote(v) for v in t[1:-1].split(",") if v.strip())
        if not values:
            raise ArffHeaderError(line_no, f"attribute {name!r} declares an empty nominal set")
        kind = "boolean" if {v.lower() for v in values} in _BOOLEAN_SETS else "categorical"
        return FeatureSpec(name, kind, values)
    raise ArffHeaderError(line_no, f"unsupported attribute type {type_text!r} for {name!r}")


def _parse_number(token: str, kind: str) -> int | float:
    value = float(token)
    if kind == "integer" and value.is_integer():
        return int(value)
    return value


def _convert_value(spec: FeatureSpec, token: str, line_no: int) -> Scalar:
    if token == MISSING:
        return None
    if spec.kind in NUMERIC_KINDS:
        try:
            return _parse_number(token, spec.kind)
        except ValueError:
            raise NonNumericValueForNumericAttribute(
                line_no, f"{spec.name}={token!r} is not numeric") from None
    if spec.values is not None and token not in spec.values:
        raise UndeclaredAttribute(
            line_no, f"{spec.name}={token!r} not among declared values {list(spec.values)}")
    return token


# ── Header ────────────────────────────────────────────────────────

def _parse_header(lines: list[tuple[int, str]], source: str) -> tuple[str, list[FeatureSpec], int]:
    """Return (relation, features, index of first data line in *lines*)."""
    relation = "dataset"
    features: list[FeatureSpec] = []
    errors: list[IngestError] = []

    for idx, (line_no, text) in enumerate(lines):
        lowered = text.lower()
        if lowered.startswith("@relation"):
            relation = _unquote(text[len("@relation"):]) or relation
        elif lowered.startswith("@attribute"):
            m = _ATTRIBUTE_RE.match(text)
            if not m:
                errors.append(ArffHeaderError(line_no, f"cannot parse declaration {text!r}"))
                continue
            name = _unquote(m.group("name"))
            if any(f.name == name for f in features):
                errors.append(ArffHeaderError(line_no, f"duplicate attribute {name!r}"))
                continue
            try:
                features.append(_feature_from_type(name, m.group("type"), line_no))
            except ArffHeaderError as exc:
                errors.append(exc)
        elif lowered.startswith("@data"):
            if errors:
                raise IngestViolation(source, errors)
            if len(features) < _LABEL_TAIL:
                raise IngestViolation(source, [ArffHeaderError(
                    line_no,
                    f"{len(features)} attribute(s) declared; the last {_LABEL_TAIL} must be "
                    "timestamp, specific attack, category attack, binary attack")])
            return relation, features, idx + 1
        elif text.startswith("@"):
            errors.append(ArffHeaderError(line_no, f"unknown keyword in {text!r}"))
        else:
            errors.append(UndeclaredAttribute(
                line_no, "data row before the @data marker" if features
                else "data row before any @attribute declaration"))

    if not errors:
        last = lines[-1][0] if lines else 0
        errors.append(ArffHeaderError(last, "missing @data marker"))
    raise IngestViolation(source, errors)


# ── Public API ────────────────────────────────────────────────────

def parse_arff_dataset(
    stream: TextIO | Iterable[str],
    *,
    sensor_id: str = "arff",
    source: str = "<stream>",
) -> ArffDataset:
    """Parse an ARFF-subset stream into ``(schema, rows)`` plus line errors.

    Header problems are fatal (``IngestViolation``); data-row problems are
    collected per line and the remaining rows are still returned.
    """
    lines = [
        (no, line.strip())
        for no, line in enumerate(stream, start=1)
        if line.strip() and not line.lstrip().startswith("%")
    ]
    relation, features, data_start = _parse_header(lines, source)

    ts_spec = features[-4]
    specific_col, category_col, binary_col = (f.name for f in features[-3:])
    schema = FeatureSchema(
        features=tuple(features),
        label_columns=(specific_col, category_col, binary_col),
        timestamp_column=ts_spec.name,
    )
    value_specs = features[:-_LABEL_TAIL]
    dataset = ArffDataset(schema=schema, relation=relation, source=source)

    for line_no, text in lines[data_start:]:
        tokens = [_unquote(t) for t in text.split(",")]
        if len(tokens) != len(features):
            dataset.errors.append(HeaderDataArityMismatch(
                line_no, f"{len(tokens)} field(s) under a {len(features)}-attribute header"))
            continue
        try:
            values = {
                spec.name: _convert_value(spec, tok, line_no)
                for spec, tok in zip(value_specs, tokens)
            }
            ts_tok, specific, category, binary = tokens[-_LABEL_TAIL:]
            try:
                timestamp = parse_timestamp(ts_tok)
            except ValueError:
                raise BadTimestamp(line_no, repr(ts_tok)) from None
            labels = None
            if not (specific == category == binary == MISSING):
                try:
                    binary_flag = int(float(binary))
                except ValueError:
                    raise NonNumericValueForNumericAttribute(
                        line_no, f"{binary_col}={binary!r} is not numeric") from None
                labels = AttackLabels(specific=specific, category=category, binary=binary_flag)
        except IngestError as exc:
            dataset.errors.append(exc)
            continue
        dataset.rows.append(MeasurementRow(
            values=values, timestamp=timestamp, labels=labels, sensor_id=sensor_id))

    _log.debug("%s: %d attribute(s), %d row(s), %d error(s)",
               source, len(features), len(dataset.rows), len(dataset.errors))
    return dataset


def _format_scalar(value: Scalar) -> str:
    if value is None:
        return MISSING
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _format_name(name: str) -> str:
    return f"'{name}'" if re.search(r"[\s{},%']", name) else name


def _format_type(spec: FeatureSpec) -> str:
    if spec.values is not None:
        return "{" + ",".join(spec.values) + "}"
    if spec.kind == "categorical":
        return "string"
    return spec.kind


def write_arff(schema: FeatureSchema, rows: Iterable[MeasurementRow], *, relation: str = "dataset") -> str:
    """Serialize ``(schema, rows)`` so that ``parse_arff_dataset`` reproduces them."""
    out = [f"@relation {_format_name(relation)}", ""]
    for spec in schema.features:
        out.append(f"@attribute {_format_name(spec.name)} {_format_type(spec)}")
    out += ["", "@data"]

    value_names = [f.name for f in schema.value_features]
    for row in rows:
        tokens = [_format_scalar(row.values.get(n)) for n in value_names]
        tokens.append(_format_scalar(float(row.timestamp)))
        if row.labels is None:
            tokens += [MISSING] * 3
        else:
            tokens += [row.labels.specific, row.labels.category, str(row.labels.binary)]
        out.append(",".join(tokens))
    return "\n".join(out) + "\n"
