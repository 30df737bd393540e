# dqsca/quantization.py: Quantization specs and value → code mapping.
"""Expert-supplied quantization specs.

A spec is a JSON document listing, per feature, the interval names, the
integer enumerations and either numeric thresholds or an explicit
value → code map:

    {
      "spec_id": "turnipseed", "version": "v1",
      "selected_features": ["length", "setpoint", ...],
      "features": [
        {"name": "length", "kind": "integer",
         "interval_names": ["Low", "Normal", "High"],
         "enumerations": [0, 1, 2], "thresholds": [16, 46]},
        {"name": "pump", "kind": "boolean",
         "interval_names": ["Off", "On"], "enumerations": [0, 1],
         "value_map": {"0": 0, "1": 1}}
      ]
    }

Loading is two-phase like every other definition file in the toolkit:
the raw dict is checked field by field, every problem is collected, and
``SpecViolation`` is raised before any ``FeatureQuantization`` is built.

Boundary semantics for thresholds t_1 < … < t_k:
    v ≤ t_1          → enumerations[0]
    v ≥ t_k          → enumerations[k]
    t_{i} < v < t_{i+1} → enumerations[i]   (interior ties go to the lower interval)
An absent value (``None``) maps to ``ABSENT_CODE``.
"""
from __future__ import annotations

import json
import logging
import math
from bisect import bisect_left
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

from schemas.domain import MeasurementRow, Scalar
from schemas.taxonomy import ALL_FEATURE_KINDS, NUMERIC_KINDS, FeatureKind

_log = logging.getLogger(__name__)

SPECS_DIR = Path(__file__).parent / "specs"

# Reserved code for a feature with no value (hold-absent merge).  Never a
# configured enumeration: enumerations must be non-negative.
ABSENT_CODE = -1


# ── Exceptions ────────────────────────────────────────────────────

class SpecViolation(Exception):
    """Raised when a quantization spec breaks one or more invariants."""

    def __init__(self, violations: list[dict[str, str]]) -> None:
        self.violations = violations
        lines = [f"  ✗ [{v['feature']}] {v['field']}: {v['detail']}" for v in violations]
        super().__init__(
            f"{len(violations)} quantization spec violation(s):\n" + "\n".join(lines)
        )


class QuantizationError(ValueError):
    """A value or row cannot be quantized under the current spec."""


class UnmappedCategoricalValue(QuantizationError):
    pass


class MissingFeature(QuantizationError):
    pass


# ── Types ─────────────────────────────────────────────────────────

@dataclass(frozen=True)
class FeatureQuantization:
    """Quantization entry for a single feature."""
    name: str
    kind: FeatureKind
    interval_names: tuple[str, ...]
    enumerations: tuple[int, ...]
    thresholds: tuple[float, ...] | None = None
    value_map: Mapping[str, int] | None = None

    @property
    def is_numeric(self) -> bool:
        return self.kind in NUMERIC_KINDS

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "name": self.name,
            "kind": self.kind,
            "interval_names": list(self.interval_names),
            "enumerations": list(self.enumerations),
        }
        if self.is_numeric:
            d["thresholds"] = list(self.thresholds or ())
        else:
            d["value_map"] = dict(self.value_map or {})
        return d


@dataclass(frozen=True)
class QuantizationSpec:
    """Ordered feature entries plus the default selected-feature list."""
    features: Mapping[str, FeatureQuantization]
    selected_features: tuple[str, ...]
    spec_id: str = "custom"
    version: str = ""
    description: str = ""
    source_path: str = field(default="", compare=False)

    def __getitem__(self, name: str) -> FeatureQuantization:
        return self.features[name]

    def __contains__(self, name: object) -> bool:
        return name in self.features

    @property
    def tag(self) -> str:
        return f"{self.spec_id}-{self.version}" if self.version else self.spec_id

    def to_dict(self) -> dict[str, Any]:
        return {
            "spec_id": self.spec_id,
            "version": self.version,
            "description": self.description,
            "selected_features": list(self.selected_features),
            "features": [f.to_dict() for f in self.features.values()],
        }

    def with_thresholds(
        self,
        new_thresholds: Mapping[str, Sequence[float] | Mapping[str, Any]],
    ) -> "QuantizationSpec":
        """Return a re-validated copy with some features' thresholds replaced.

        A plain threshold list keeps the feature's interval names and
        enumerations when the interval count is unchanged; otherwise the
        intervals are renumbered ``0..k`` and named ``I0..Ik``.  A mapping
        replaces the whole entry (``kind``/``name`` default to the old ones).
        """
        raw = self.to_dict()
        entries = {e["name"]: e for e in raw["features"]}
        for name, update in new_thresholds.items():
            if name not in entries:
                raise SpecViolation([{
                    "feature": name, "field": "name", "detail": "not in current spec"}])
            entry = entries[name]
            if isinstance(update, Mapping):
                entry.update({k: v for k, v in update.items() if k != "name"})
                continue
            thresholds = list(update)
            entry["thresholds"] = thresholds
            if len(entry["enumerations"]) != len(thresholds) + 1:
                count = len(thresholds) + 1
                entry["enumerations"] = list(range(count))
                entry["interval_names"] = [f"I{i}" for i in range(count)]
                _log.debug("Feature %s renumbered to %d interval(s)", name, count)
        return build_spec(raw, source_path=self.source_path)


# ── Validation ────────────────────────────────────────────────────

def _is_number(x: Any) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def validate_feature(entry: Any, index: int) -> list[dict[str, str]]:
    """Validate one raw feature entry. Returns a (possibly empty) violation list."""
    if not isinstance(entry, dict):
        return [{"feature": f"#{index}", "field": "entry", "detail": "must be an object"}]
    name = entry.get("name")
    fid = name if isinstance(name, str) and name else f"#{index}"
    violations: list[dict[str, str]] = []

    def bad(fld: str, detail: str) -> None:
        violations.append({"feature": fid, "field": fld, "detail": detail})

    if not isinstance(name, str) or not name:
        bad("name", "missing or empty")

    kind = entry.get("kind")
    if kind not in ALL_FEATURE_KINDS:
        bad("kind", f"{kind!r} not in {list(ALL_FEATURE_KINDS)}")
        return violations

    names = entry.get("interval_names")
    enums = entry.get("enumerations")
    if not isinstance(names, list) or not names or not all(isinstance(n, str) for n in names):
        bad("interval_names", "must be a non-empty list of strings")
        names = None
    if (not isinstance(enums, list) or not enums
            or not all(isinstance(e, int) and not isinstance(e, bool) for e in enums)):
        bad("enumerations", "must be a non-empty list of integers")
        enums = None
    elif any(e < 0 for e in enums):
        bad("enumerations", f"codes must be non-negative ({ABSENT_CODE} is reserved for absent)")
    elif len(set(enums)) != len(enums):
        bad("enumerations", "codes must be unique")
    if names is not None and enums is not None and len(names) != len(enums):
        bad("interval_names", f"{len(names)} name(s) for {len(enums)} enumeration(s)")

    if kind in NUMERIC_KINDS:
        thr = entry.get("thresholds")
        if "value_map" in entry:
            bad("value_map", f"not allowed for {kind} features")
        if not isinstance(thr, list) or not thr or not all(_is_number(t) for t in thr):
            bad("thresholds", "must be a non-empty list of finite numbers")
        else:
            if any(b <= a for a, b in zip(thr, thr[1:])):
                bad("thresholds", f"must be strictly increasing, got {thr}")
            if enums is not None and len(enums) != len(thr) + 1:
                bad("enumerations", f"{len(enums)} code(s) for {len(thr)} threshold(s); need {len(thr) + 1}")
        if enums is not None and any(b <= a for a, b in zip(enums, enums[1:])):
            bad("enumerations", "must be increasing for numeric features")
    else:
        vmap = entry.get("value_map")
        if "thresholds" in entry:
            bad("thresholds", f"not allowed for {kind} features")
        if not isinstance(vmap, dict) or not vmap:
            bad("value_map", "must be a non-empty object")
        elif enums is not None:
            stray = sorted({str(v) for v in vmap.values()} - {str(e) for e in enums})
            if stray or not all(isinstance(v, int) and not isinstance(v, bool) for v in vmap.values()):
                bad("value_map", f"codes {stray or 'non-integer'} are not declared enumerations")
    return violations


def validate_spec_dict(raw: Any) -> list[dict[str, str]]:
    """Collect every violation in a raw spec dict."""
    if not isinstance(raw, dict):
        return [{"feature": "<spec>", "field": "document", "detail": "must be a JSON object"}]
    features = raw.get("features")
    if not isinstance(features, list) or not features:
        return [{"feature": "<spec>", "field": "features", "detail": "must be a non-empty list"}]

    violations: list[dict[str, str]] = []
    seen: set[str] = set()
    for i, entry in enumerate(features):
        violations.extend(validate_feature(entry, i))
        name = entry.get("name") if isinstance(entry, dict) else None
        if isinstance(name, str):
            if name in seen:
                violations.append({"feature": name, "field": "name", "detail": "duplicate feature"})
            seen.add(name)

    selected = raw.get("selected_features")
    if selected is not None:
        if not isinstance(selected, list) or not all(isinstance(s, str) for s in selected):
            violations.append({"feature": "<spec>", "field": "selected_features",
                               "detail": "must be a list of feature names"})
        else:
            for s in selected:
                if s not in seen:
                    violations.append({"feature": s, "field": "selected_features",
                                       "detail": "selected but not declared"})
    return violations


def _normalize_key(value: Any) -> str:
    """Canonical lookup key for categorical/boolean values ("1", 1, 1.0, True → "1")."""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    return str(value).strip().lower()


def build_spec(raw: dict[str, Any], *, source_path: str = "") -> QuantizationSpec:
    """Validate *raw* and construct a frozen ``QuantizationSpec``.

    Raises ``SpecViolation`` listing every problem; nothing is built
    unless the whole document is valid.
    """
    violations = validate_spec_dict(raw)
    if violations:
        raise SpecViolation(violations)

    features: dict[str, FeatureQuantization] = {}
    for entry in raw["features"]:
        numeric = entry["kind"] in NUMERIC_KINDS
        features[entry["name"]] = FeatureQuantization(
            name=entry["name"],
            kind=entry["kind"],
            interval_names=tuple(entry["interval_names"]),
            enumerations=tuple(entry["enumerations"]),
            thresholds=tuple(float(t) for t in entry["thresholds"]) if numeric else None,
            value_map=None if numeric else {
                _normalize_key(k): int(v) for k, v in entry["value_map"].items()
            },
        )
    selected = tuple(raw.get("selected_features") or features)
    return QuantizationSpec(
        features=features,
        selected_features=selected,
        spec_id=str(raw.get("spec_id", "custom")),
        version=str(raw.get("version", "")),
        description=str(raw.get("description", "")),
        source_path=source_path,
    )


# ── Loading ───────────────────────────────────────────────────────

def list_specs() -> list[str]:
    """Names of the specs shipped under ``dqsca/specs/``."""
    return sorted(p.stem for p in SPECS_DIR.glob("*.json"))


def load_spec(ref: str | Path) -> QuantizationSpec:
    """Load a spec from a file path, or by shipped name (``"turnipseed_v1"``)."""
    path = Path(ref)
    if not path.exists():
        shipped = SPECS_DIR / f"{ref}.json"
        if not shipped.exists():
            raise FileNotFoundError(f"Quantization spec not found: {ref}")
        path = shipped
    with open(path, encoding="utf-8") as f:
        raw = json.load(f)
    spec = build_spec(raw, source_path=str(path))
    _log.debug("Loaded quantization spec %s (%d feature(s)) from %s",
               spec.tag, len(spec.features), path)
    return spec


# ── Quantization ──────────────────────────────────────────────────

def quantize_value(value: Scalar, entry: FeatureQuantization) -> int:
    """Map one value to its enumeration code."""
    if value is None:
        return ABSENT_CODE

    if entry.is_numeric:
        try:
            v = float(value)
        except (TypeError, ValueError):
            raise QuantizationError(f"{entry.name}: {value!r} is not numeric") from None
        if math.isnan(v):
            return ABSENT_CODE
        thr = entry.thresholds or ()
        if v <= thr[0]:
            return entry.enumerations[0]
        if v >= thr[-1]:
            return entry.enumerations[-1]
        return entry.enumerations[bisect_left(thr, v)]

    vmap = entry.value_map or {}
    key = _normalize_key(value)
    if key not in vmap and entry.kind == "boolean":
        key = {"true": "1", "false": "0", "on": "1", "off": "0"}.get(key, key)
    try:
        return vmap[key]
    except KeyError:
        raise UnmappedCategoricalValue(
            f"{entry.name}: value {value!r} has no code (known: {sorted(vmap)})") from None


def quantize_row(
    row: MeasurementRow,
    spec: QuantizationSpec,
    selected_features: Sequence[str],
) -> tuple[int, ...]:
    """Quantize the selected features of *row*, in the given order."""
    codes: list[int] = []
    for name in selected_features:
        if name not in row.values:
            raise MissingFeature(f"row at t={row.timestamp} has no feature {name!r}")
        if name not in spec.features:
            raise MissingFeature(f"spec {spec.tag} has no entry for feature {name!r}")
        codes.append(quantize_value(row.values[name], spec.features[name]))
    return tuple(codes)


def format_code_vector(codes: Sequence[int]) -> str:
    return ",".join(str(c) for c in codes)
