"""Raw Modbus-frame dataset parser.

One record per line, six delimited fields:

    frame, attack category, specific attack, source, destination, timestamp

The frame is hex-encoded.  It is kept as opaque bytes; address,
function code, register, value and CRC are decoded on a best-effort
basis and a short frame simply leaves those fields empty.

Usage:
    from ingest.raw_dataset import parse_raw_dataset
    result = parse_raw_dataset(open("raw.txt"), delimiter=",")
    result.records   # list[RawRecord], file order
    result.errors    # list[IngestError] with line numbers
"""
from __future__ import annotations

import logging
import math
from typing import Iterable, TextIO

from ingest.errors import (
    BadTimestamp,
    MalformedFrame,
    MalformedLine,
    ParseResult,
    SchemaMismatch,
    UnknownAttackLabel,
)
from schemas.domain import AttackLabels, FeatureSchema, MeasurementRow, ModbusFrame, RawRecord
from schemas.taxonomy import (
    ATTACK_CATEGORY,
    AttackCategory,
    SpecificAttack,
    lookup_attack_category,
    lookup_specific_attack,
)

_log = logging.getLogger(__name__)

RAW_FIELD_COUNT = 6

RAW_ROW_FEATURES: tuple[str, ...] = (
    "address", "function_code", "register", "value", "length", "crc_ok",
)


# ── Modbus frame decoding ─────────────────────────────────────────

def modbus_crc16(data: bytes) -> int:
    """CRC-16/Modbus (reflected poly 0xA001, init 0xFFFF)."""
    crc = 0xFFFF
    for byte in data:
        crc ^= byte
        for _ in range(8):
            if crc & 1:
                crc = (crc >> 1) ^ 0xA001
            else:
                crc >>= 1
    return crc


def decode_modbus_frame(raw: bytes) -> ModbusFrame:
    """Best-effort decode.  Never raises; missing fields stay ``None``."""
    if len(raw) >= 4:
        body, crc_bytes = raw[:-2], raw[-2:]
        crc = int.from_bytes(crc_bytes, "little")
        crc_ok = modbus_crc16(body) == crc
    else:
        body, crc, crc_ok = raw, None, None

    return ModbusFrame(
        raw=raw,
        address=body[0] if len(body) >= 1 else None,
        function_code=body[1] if len(body) >= 2 else None,
        register_address=int.from_bytes(body[2:4], "big") if len(body) >= 4 else None,
        value=int.from_bytes(body[4:6], "big") if len(body) >= 6 else None,
        crc=crc,
        crc_ok=crc_ok,
    )


def _parse_frame_hex(text: str) -> bytes:
    cleaned = text.strip().strip("'\"")
    if cleaned.lower().startswith("0x"):
        cleaned = cleaned[2:]
    cleaned = cleaned.replace(" ", "").replace(":", "")
    if not cleaned:
        raise ValueError("empty frame")
    return bytes.fromhex(cleaned)


def parse_timestamp(text: str) -> float:
    """Seconds, fractional allowed, never negative."""
    value = float(text.strip())
    if math.isnan(value) or math.isinf(value) or value < 0:
        raise ValueError(f"timestamp out of range: {text!r}")
    return value


# ── Attack labels ─────────────────────────────────────────────────

def parse_attack_label(text: str, *, line_no: int = 0) -> SpecificAttack:
    """Recognise a specific-attack label, ignoring case, punctuation and diacritics."""
    specific = lookup_specific_attack(text)
    if specific is None:
        raise UnknownAttackLabel(line_no, f"unknown attack {text!r}")
    return specific


def parse_attack_category(text: str, *, line_no: int = 0) -> AttackCategory:
    category = lookup_attack_category(text)
    if category is None:
        raise UnknownAttackLabel(line_no, f"unknown category {text!r}")
    return category


# ── Public API ────────────────────────────────────────────────────

def check_raw_schema(schema: FeatureSchema) -> None:
    """Raise ``SchemaMismatch`` if *schema* needs a value feature raw frames lack."""
    unknown = [f.name for f in schema.value_features if f.name not in RAW_ROW_FEATURES]
    if unknown:
        raise SchemaMismatch(
            f"raw frames carry no feature(s) {unknown}; available: {list(RAW_ROW_FEATURES)}")


def parse_raw_dataset(
    stream: TextIO | Iterable[str],
    schema: FeatureSchema | None = None,
    *,
    delimiter: str = ",",
    source: str = "<stream>",
) -> ParseResult[RawRecord]:
    """Parse raw dataset lines into ``RawRecord`` objects.

    Every non-empty line produces either one record or one error, so
    ``len(records) + len(errors)`` equals the number of non-empty lines.
    No quoting is recognised; the delimiter must not occur inside a field.
    A *schema* is checked against ``RAW_ROW_FEATURES`` before any line
    is read.
    """
    if schema is not None:
        check_raw_schema(schema)
    result: ParseResult[RawRecord] = ParseResult(source=source)

    for line_no, line in enumerate(stream, start=1):
        text = line.rstrip("\r\n")
        if not text.strip():
            continue

        fields = [f.strip() for f in text.split(delimiter)]
        if len(fields) != RAW_FIELD_COUNT:
            result.errors.append(MalformedLine(
                line_no, f"expected {RAW_FIELD_COUNT} fields, got {len(fields)}"))
            continue
        frame_text, category_text, specific_text, src, dst, ts_text = fields

        try:
            frame = decode_modbus_frame(_parse_frame_hex(frame_text))
        except ValueError as exc:
            result.errors.append(MalformedFrame(line_no, f"{frame_text!r}: {exc}"))
            continue

        try:
            category = parse_attack_category(category_text, line_no=line_no)
            specific = parse_attack_label(specific_text, line_no=line_no)
        except UnknownAttackLabel as exc:
            result.errors.append(exc)
            continue
        if ATTACK_CATEGORY[specific] is not category:
            result.errors.append(UnknownAttackLabel(
                line_no,
                f"category mismatch: {specific_text!r} belongs to "
                f"{ATTACK_CATEGORY[specific].value}, not {category.value}",
            ))
            continue

        try:
            timestamp = parse_timestamp(ts_text)
        except ValueError:
            result.errors.append(BadTimestamp(line_no, f"{ts_text!r}"))
            continue

        result.records.append(RawRecord(
            modbus_frame=frame,
            attack_category=category,
            specific_attack=specific,
            source=src,
            destination=dst,
            timestamp=timestamp,
            line_no=line_no,
        ))

    if result.errors:
        _log.warning("%s: %d of %d line(s) rejected", source,
                     len(result.errors), len(result.errors) + len(result.records))
    return result


def records_to_rows(
    records: Iterable[RawRecord],
    *,
    sensor_id: str = "raw",
    schema: FeatureSchema | None = None,
) -> list[MeasurementRow]:
    """Project raw records onto measurement rows so they can feed DQSCA.

    With a *schema* only its value features are kept, in schema order.
    """
    if schema is not None:
        check_raw_schema(schema)
        keep = [f.name for f in schema.value_features]
    else:
        keep = list(RAW_ROW_FEATURES)
    rows: list[MeasurementRow] = []
    for rec in records:
        f = rec.modbus_frame
        values = {
            "address": f.address,
            "function_code": f.function_code,
            "register": f.register_address,
            "value": f.value,
            "length": f.length,
            "crc_ok": None if f.crc_ok is None else int(f.crc_ok),
        }
        rows.append(MeasurementRow(
            values={name: values[name] for name in keep},
            timestamp=rec.timestamp,
            labels=AttackLabels.from_specific(rec.specific_attack),
            sensor_id=sensor_id,
        ))
    return rows
