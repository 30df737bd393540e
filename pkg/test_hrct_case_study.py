"""End-to-end risk evaluation of the DoS case study tree."""
from __future__ import annotations

import pytest

from alertflow.severity import load_scale
from hrct.loader import load_damage, load_tree, with_damage
from hrct.propagation import EvalConfig
from hrct.risk import evaluate
from ingest.alert_log import parse_alert_log
from reporting.render import format_money, render_risk


@pytest.fixture
def tree():
    return load_tree("dos_case_study")


@pytest.fixture
def alerts(fixtures_dir):
    with open(fixtures_dir / "dos_alerts.csv", encoding="utf-8") as f:
        result = parse_alert_log(f)
    result.raise_for_errors()
    return result.records


class TestDosCaseStudy:
    """Alerts at nodes 1, 2, 6, 7 and a 7763/10000 malformed-packet quorum."""

    def test_rounded_total(self, tree, alerts):
        report = evaluate(tree, alerts, EvalConfig(quorum_rounding=True))
        assert report.root_cp == 1.0
        assert report.cp["quorum_8_9"] == 0.7
        assert report.risks == {"6": 900.0, "quorum_8_9": pytest.approx(1050.0)}
        assert report.total == pytest.approx(1950.0)
        assert format_money(report.total) == "1950"

    def test_exact_total(self, tree, alerts):
        report = evaluate(tree, alerts)
        assert report.cp["quorum_8_9"] == pytest.approx(0.7763)
        assert report.total == pytest.approx(2064.45)
        assert format_money(report.total) == "2064.45"

    def test_no_imputation_needed(self, tree, alerts):
        report = evaluate(tree, alerts)
        assert report.imputations == []
        assert report.confidence == {}

    def test_silent_leaves_have_zero_cp(self, tree, alerts):
        report = evaluate(tree, alerts)
        assert report.cp["3"] == report.cp["8"] == report.cp["9"] == 0.0

    def test_base_events_without_damage_are_reported(self, tree, alerts):
        report = evaluate(tree, alerts)
        flagged = {d["node_id"] for d in report.diagnostics if d["kind"] == "no_damage_entry"}
        assert flagged == {"1", "2", "7"}

    def test_no_alerts(self, tree):
        report = evaluate(tree, [])
        assert report.total == 0.0
        assert report.root_cp == 0.0
        assert report.alert_count == 0

    def test_unknown_event_does_not_change_total(self, tree, alerts):
        stray = alerts[0].with_changes(event_id="42", timestamp=500.0)
        report = evaluate(tree, [*alerts, stray], EvalConfig(quorum_rounding=True))
        assert report.total == pytest.approx(1950.0)
        assert report.diagnostics[0]["kind"] == "unresolved_event"

    def test_severity_floor_drops_alerts(self, tree, alerts, fixtures_dir):
        scale = load_scale(fixtures_dir / "scales.json")
        report = evaluate(tree, alerts, EvalConfig(severity_floor=9), scale=scale)
        assert report.cp["6"] == 0.0
        assert any(d["kind"] == "below_severity_floor" for d in report.diagnostics)

    def test_separate_damage_table(self, tree, alerts):
        damage, _ = load_damage("dos_base_events", set(tree.nodes))
        report = evaluate(with_damage(tree, damage), alerts)
        assert report.risks["6"] == 900.0
        assert report.risks["10"] == 1900.0
        assert report.risks["8"] == report.risks["9"] == 0.0
        assert report.total == pytest.approx(2800.0)

    def test_report_text_is_deterministic(self, tree, alerts):
        config = EvalConfig(quorum_rounding=True)
        first = render_risk(evaluate(tree, alerts, config), "text")
        second = render_risk(evaluate(tree, list(reversed(alerts)), config), "text")
        assert first == second
        assert "R_total = 1950" in first
