"""Core domain types: shared contracts used across the entire toolkit.

These are the canonical shapes that cross package boundaries.
Packages may keep richer internal structures, but everything that
leaves ``ingest`` and enters ``dqsca`` / ``alertflow`` / ``hrct`` must
conform to these contracts.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any, Mapping

from schemas.taxonomy import (
    ATTACK_CATEGORY,
    AttackCategory,
    FeatureKind,
    SpecificAttack,
)

Scalar = int | float | str | bool | None


# ── Modbus frame ──────────────────────────────────────────────────

@dataclass(frozen=True)
class ModbusFrame:
    """Opaque frame bytes plus best-effort decoded header fields.

    Decoded fields are ``None`` when the frame is too short to hold them.
    """
    raw: bytes
    address: int | None = None
    function_code: int | None = None
    register_address: int | None = None
    value: int | None = None
    crc: int | None = None
    crc_ok: bool | None = None

    @property
    def length(self) -> int:
        return len(self.raw)

    def hex(self) -> str:
        return self.raw.hex()


# ── Labels ────────────────────────────────────────────────────────

@dataclass(frozen=True)
class AttackLabels:
    """Ground-truth labels attached to a dataset row."""
    specific: str
    category: str
    binary: int

    @classmethod
    def from_specific(cls, attack: SpecificAttack) -> "AttackLabels":
        category = ATTACK_CATEGORY[attack]
        return cls(
            specific=attack.value,
            category=category.value,
            binary=0 if attack is SpecificAttack.NORMAL else 1,
        )


# ── Raw dataset record ────────────────────────────────────────────

@dataclass(frozen=True)
class RawRecord:
    """One line of the raw Modbus-frame dataset."""
    modbus_frame: ModbusFrame
    attack_category: AttackCategory
    specific_attack: SpecificAttack
    source: str
    destination: str
    timestamp: float
    line_no: int = 0


# ── Feature schema ────────────────────────────────────────────────

@dataclass(frozen=True)
class FeatureSpec:
    """A declared column. ``values`` holds nominal values for categorical/boolean."""
    name: str
    kind: FeatureKind
    values: tuple[str, ...] | None = None


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered column declarations plus the label / timestamp columns.

    ``features`` lists every declared column, label and timestamp
    columns included, in file order.
    """
    features: tuple[FeatureSpec, ...]
    label_columns: tuple[str, str, str]   # (specific, category, binary)
    timestamp_column: str

    def __post_init__(self) -> None:
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise ValueError(f"Duplicate feature names: {dupes}")
        for col in (*self.label_columns, self.timestamp_column):
            if col not in names:
                raise ValueError(f"Column {col!r} is not a declared feature")

    @property
    def names(self) -> list[str]:
        return [f.name for f in self.features]

    @property
    def value_features(self) -> list[FeatureSpec]:
        """Declared columns that are neither labels nor the timestamp."""
        special = {*self.label_columns, self.timestamp_column}
        return [f for f in self.features if f.name not in special]

    def get(self, name: str) -> FeatureSpec | None:
        for f in self.features:
            if f.name == name:
                return f
        return None


# ── Measurement row ───────────────────────────────────────────────

@dataclass(frozen=True)
class MeasurementRow:
    """A timestamped vector of feature values from one sensor (or merged).

    ``values`` maps feature name → scalar; ``None`` marks an absent value.
    """
    values: Mapping[str, Scalar]
    timestamp: float
    labels: AttackLabels | None = None
    sensor_id: str = ""

    def with_values(self, values: Mapping[str, Scalar]) -> "MeasurementRow":
        return replace(self, values=dict(values))


# ── Alert ─────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Alert:
    """A detector event, as parsed and later normalised.

    ``reliability`` is ``None`` when the detector supplied no confidence;
    ``severity_common`` is ``None`` until ``normalize_severity`` runs.
    ``evidence`` is optional (achieved, attempted) quorum evidence.
    """
    timestamp: float
    detector_id: str
    event_id: str
    signature: str
    source: str
    destination: str
    severity_native: float
    reliability: float | None = None
    severity_common: int | None = None
    evidence: tuple[int, int] | None = None
    line_no: int = 0
    synthetic: bool = False

    @property
    def effective_reliability(self) -> float:
        """Reliability with the "absent means one" default applied."""
        return 1.0 if self.reliability is None else self.reliability

    def with_changes(self, **changes: Any) -> "Alert":
        return replace(self, **changes)

