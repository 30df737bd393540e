# schemas/taxonomy.py: Single authoritative taxonomy for the toolkit.
"""Centralised enumerations shared by every package.

┌─────────────────────────────────────────────────────────────────┐
│                  LAYER 0 - SHARED CONTRACTS                     │
│                                                                 │
│  Canonical type definitions and mapping tables.                 │
│  Consumed by ingest, dqsca, alertflow, hrct and metrics.        │
│  Changes here affect ALL downstream packages.                   │
└─────────────────────────────────────────────────────────────────┘

Canonical sources defined here:
  - ``AttackCategory``   - the four attack categories plus Normal
  - ``SpecificAttack``   - the seven pipeline attacks plus Normal
  - ``ATTACK_CATEGORY``  - specific attack → category (a function)
  - ``FeatureKind``      - integer | real | boolean | categorical
  - ``GateKind`` / ``QuorumMode`` / ``SeverityPolicy`` / ``RIMode``
"""
from __future__ import annotations

import re
import unicodedata
from enum import Enum
from typing import Literal, get_args


# ══════════════════════════════════════════════════════════════════
# Attack taxonomy
# ══════════════════════════════════════════════════════════════════

class AttackCategory(str, Enum):
    RESPONSE_INJECTION = "ResponseInjection"
    COMMAND_INJECTION = "CommandInjection"
    DOS = "DoS"
    RECONNAISSANCE = "Reconnaissance"
    NORMAL = "Normal"


class SpecificAttack(str, Enum):
    NAIVE_MALICIOUS_RESPONSE_INJECTION = "NaiveMaliciousResponseInjection"
    COMPLEX_MALICIOUS_RESPONSE_INJECTION = "ComplexMaliciousResponseInjection"
    MALICIOUS_STATE_COMMAND_INJECTION = "MaliciousStateCommandInjection"
    MALICIOUS_PARAMETER_COMMAND_INJECTION = "MaliciousParameterCommandInjection"
    MALICIOUS_FUNCTION_CODE_INJECTION = "MaliciousFunctionCodeInjection"
    DENIAL_OF_SERVICE = "DenialOfService"
    INTERRUPTION_RECONNAISSANCE = "InterruptionReconnaissance"
    NORMAL = "Normal"


# Every specific attack maps to exactly one category.
ATTACK_CATEGORY: dict[SpecificAttack, AttackCategory] = {
    SpecificAttack.NAIVE_MALICIOUS_RESPONSE_INJECTION: AttackCategory.RESPONSE_INJECTION,
    SpecificAttack.COMPLEX_MALICIOUS_RESPONSE_INJECTION: AttackCategory.RESPONSE_INJECTION,
    SpecificAttack.MALICIOUS_STATE_COMMAND_INJECTION: AttackCategory.COMMAND_INJECTION,
    SpecificAttack.MALICIOUS_PARAMETER_COMMAND_INJECTION: AttackCategory.COMMAND_INJECTION,
    SpecificAttack.MALICIOUS_FUNCTION_CODE_INJECTION: AttackCategory.COMMAND_INJECTION,
    SpecificAttack.DENIAL_OF_SERVICE: AttackCategory.DOS,
    SpecificAttack.INTERRUPTION_RECONNAISSANCE: AttackCategory.RECONNAISSANCE,
    SpecificAttack.NORMAL: AttackCategory.NORMAL,
}

assert set(ATTACK_CATEGORY) == set(SpecificAttack), \
    f"ATTACK_CATEGORY missing: {set(SpecificAttack) - set(ATTACK_CATEGORY)}"

# Display names as they appear in dataset files.
SPECIFIC_ATTACK_DISPLAY: dict[SpecificAttack, str] = {
    SpecificAttack.NAIVE_MALICIOUS_RESPONSE_INJECTION: "Naïve Malicious Response Injection",
    SpecificAttack.COMPLEX_MALICIOUS_RESPONSE_INJECTION: "Complex Malicious Response Injection",
    SpecificAttack.MALICIOUS_STATE_COMMAND_INJECTION: "Malicious State Command Injection",
    SpecificAttack.MALICIOUS_PARAMETER_COMMAND_INJECTION: "Malicious Parameter Command Injection",
    SpecificAttack.MALICIOUS_FUNCTION_CODE_INJECTION: "Malicious Function Code Injection",
    SpecificAttack.DENIAL_OF_SERVICE: "Denial of Service",
    SpecificAttack.INTERRUPTION_RECONNAISSANCE: "Interruption Reconnaissance",
    SpecificAttack.NORMAL: "Normal",
}

CATEGORY_DISPLAY: dict[AttackCategory, str] = {
    AttackCategory.RESPONSE_INJECTION: "Response Injection",
    AttackCategory.COMMAND_INJECTION: "Command Injection",
    AttackCategory.DOS: "Denial of Service",
    AttackCategory.RECONNAISSANCE: "Reconnaissance",
    AttackCategory.NORMAL: "Normal",
}


def label_key(text: str) -> str:
    """Fold a label to lowercase ASCII alphanumerics ("Naïve X." → "naivex")."""
    folded = unicodedata.normalize("NFKD", text).encode("ascii", "ignore").decode("ascii")
    return re.sub(r"[^a-z0-9]", "", folded.lower())


_SPECIFIC_BY_KEY: dict[str, SpecificAttack] = {}
for _sa in SpecificAttack:
    _SPECIFIC_BY_KEY[label_key(_sa.value)] = _sa
    _SPECIFIC_BY_KEY[label_key(SPECIFIC_ATTACK_DISPLAY[_sa])] = _sa
_SPECIFIC_BY_KEY["dos"] = SpecificAttack.DENIAL_OF_SERVICE

_CATEGORY_BY_KEY: dict[str, AttackCategory] = {}
for _cat in AttackCategory:
    _CATEGORY_BY_KEY[label_key(_cat.value)] = _cat
    _CATEGORY_BY_KEY[label_key(CATEGORY_DISPLAY[_cat])] = _cat


def lookup_specific_attack(text: str) -> SpecificAttack | None:
    return _SPECIFIC_BY_KEY.get(label_key(text))


def lookup_attack_category(text: str) -> AttackCategory | None:
    return _CATEGORY_BY_KEY.get(label_key(text))


# ══════════════════════════════════════════════════════════════════
# Feature, gate and policy enums: enforced at load time
# ══════════════════════════════════════════════════════════════════

FeatureKind = Literal["integer", "real", "boolean", "categorical"]
ALL_FEATURE_KINDS: tuple[str, ...] = get_args(FeatureKind)
NUMERIC_KINDS: frozenset[str] = frozenset({"integer", "real"})

GateKind = Literal["AND", "OR", "QUORUM"]
ALL_GATE_KINDS: tuple[str, ...] = get_args(GateKind)

QuorumMode = Literal["ThresholdMean", "Ratio"]
ALL_QUORUM_MODES: tuple[str, ...] = get_args(QuorumMode)

SeverityPolicy = Literal["Aggressive", "Moderate", "Conservative"]
ALL_POLICIES: tuple[str, ...] = get_args(SeverityPolicy)

RIMode = Literal["weighted", "max"]
ALL_RI_MODES: tuple[str, ...] = get_args(RIMode)


def normalize_policy(text: str) -> str:
    """Accept any case for a severity policy name ("aggressive" → "Aggressive")."""
    for p in ALL_POLICIES:
        if p.lower() == text.strip().lower():
            return p
    raise ValueError(f"Unknown severity policy {text!r}; expected one of {list(ALL_POLICIES)}")
