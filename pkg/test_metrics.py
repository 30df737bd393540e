"""Tests for the evaluation metrics: MAPE, improvements, detection cost, VEA-bility."""
from __future__ import annotations

import json
import math

import pytest

from metrics.accuracy import (
    accuracy_delta,
    combined_time_reduction,
    mape,
    relative_improvement,
    time_reduction_rate,
)
from metrics.detection_cost import DetectionStats, maxion_townsend
from metrics.errors import (
    LengthMismatch,
    MetricsConfigViolation,
    NonpositiveBaseline,
    OutOfRangePercent,
    ScoreOutOfRange,
    ZeroActualValue,
    ZeroNetworkServices,
)
from metrics.suite import load_metrics, run_metrics, validate_metrics_dict
from metrics.veability import (
    AssetProfile,
    VulnerabilityScore,
    attackability_dim,
    build_assets,
    cps_from_report,
    exploitability_dim,
    load_assets,
    mean_veability,
    severity,
    veability,
    veability_advantage,
    veability_from_dims,
    vulnerability_dim,
)


# ═══════════════════════════════════════════════════════════════════
#  Helpers
# ═══════════════════════════════════════════════════════════════════

_CASE_STUDY_REPORT = {
    "tree_id": "dos_case_study",
    "nodes": [
        {"node_id": "6", "cp": 1.0, "asset_value": 900, "risk": 900},
        {"node_id": "quorum_8_9", "cp": 0.7, "asset_value": 1500, "risk": 1050},
    ],
    "r_total": 1950,
}


def _rows_by_key(rows):
    return {(r.metric, r.subject): r.value for r in rows}


# ═══════════════════════════════════════════════════════════════════
#  1. Accuracy and time
# ═══════════════════════════════════════════════════════════════════

class TestMape:

    def test_identical_is_zero(self):
        assert mape([1900, 900, 1500], [1900, 900, 1500]) == 0.0

    def test_fraction(self):
        assert mape([100, 200], [110, 150]) == pytest.approx((0.1 + 0.25) / 2)

    def test_negative_actual_uses_magnitude(self):
        assert mape([-10], [-12]) == pytest.approx(0.2)

    def test_errors(self):
        with pytest.raises(LengthMismatch):
            mape([1, 2], [1])
        with pytest.raises(LengthMismatch):
            mape([], [])
        with pytest.raises(ZeroActualValue):
            mape([1, 0], [1, 1])


class TestImprovements:

    @pytest.mark.parametrize("baseline,ours,expected", [
        (0.408, 0.164, 59.80),
        (0.392, 0.103, 73.72),
        (0.454, 0.150, 66.96),
    ])
    def test_mape_reduction_per_category(self, baseline, ours, expected):
        assert relative_improvement(baseline, ours) == pytest.approx(expected, abs=0.01)

    def test_nonpositive_baseline(self):
        with pytest.raises(NonpositiveBaseline):
            relative_improvement(0, 0.1)
        with pytest.raises(NonpositiveBaseline):
            time_reduction_rate(-1, 0)

    def test_accuracy_delta(self):
        assert accuracy_delta(91.87, 94.32) == pytest.approx(-2.45)

    def test_time_reduction(self):
        assert time_reduction_rate(200, 150) == 25.0

    @pytest.mark.parametrize("parts,expected", [
        ([11.37, 27.74], 39.11),
        ([11.41, 42.06], 53.47),
    ])
    def test_combined_time_reduction(self, parts, expected):
        assert combined_time_reduction(parts) == pytest.approx(expected)


# ═══════════════════════════════════════════════════════════════════
#  2. Detection cost
# ═══════════════════════════════════════════════════════════════════

class TestMaxionTownsend:

    def test_reported_detectors(self):
        assert maxion_townsend(DetectionStats(55, 45)) == 385
        assert maxion_townsend(DetectionStats(13, 90)) == 88

    def test_perfect_detector(self):
        assert maxion_townsend(DetectionStats(0, 100)) == 0

    @pytest.mark.parametrize("fp,hit", [(-1, 50), (50, 101), (math.nan, 50)])
    def test_out_of_range(self, fp, hit):
        with pytest.raises(OutOfRangePercent):
            DetectionStats(fp, hit)


# ═══════════════════════════════════════════════════════════════════
#  3. VEA-bility
# ═══════════════════════════════════════════════════════════════════

class TestVeability:

    @pytest.fixture
    def assets(self, fixtures_dir):
        return {a.asset_id: a for a in load_assets(fixtures_dir / "assets.json")}

    def test_single_vulnerability(self, assets):
        mtu = assets["MTU"]
        assert vulnerability_dim(mtu) == pytest.approx(9)
        assert exploitability_dim(mtu) == pytest.approx(10)
        assert attackability_dim(mtu) == pytest.approx(7)
        assert veability(mtu) == pytest.approx(10 - 26 / 3)

    def test_log_sum_exp_and_clamp(self, assets):
        rtu = assets["RTU"]
        assert vulnerability_dim(rtu) == pytest.approx(math.log(math.exp(5) + math.exp(7)))
        assert exploitability_dim(rtu) == pytest.approx(math.log(math.exp(6) + math.exp(8)) / 2)
        assert attackability_dim(rtu) == 10.0

    def test_no_vulnerabilities(self, assets):
        assert veability(assets["historian"]) == 10.0

    def test_dimension_clamped_at_ten(self):
        vulns = tuple(VulnerabilityScore(f"v{i}", 10, 10, 10) for i in range(3))
        a = AssetProfile("x", vulns, services_on_asset=1, network_services_total=1)
        assert vulnerability_dim(a) == 10.0
        assert exploitability_dim(a) == 10.0

    def test_from_dims_and_mean(self, assets):
        assert veability_from_dims(0, 0, 0) == 10.0
        assert mean_veability([]) == 0.0
        assert mean_veability([assets["historian"], assets["historian"]]) == 10.0

    def test_advantage(self):
        assert veability_advantage(6, 4) == 50.0
        with pytest.raises(NonpositiveBaseline):
            veability_advantage(6, 0)

    def test_score_and_service_ranges(self):
        with pytest.raises(ScoreOutOfRange):
            VulnerabilityScore("v", 11, 1, 1)
        with pytest.raises(ValueError):
            AssetProfile("x", services_on_asset=3, network_services_total=2)
        with pytest.raises(ValueError):
            AssetProfile("x", event_cps=(1.2,))
        with pytest.raises(ZeroNetworkServices):
            exploitability_dim(AssetProfile("x", network_services_total=0))

    def test_cps_from_risk_report(self, fixtures_dir):
        raw = json.loads((fixtures_dir / "assets_from_report.json").read_text(encoding="utf-8"))
        assets = {a.asset_id: a for a in build_assets(raw, cps_from_report(_CASE_STUDY_REPORT))}
        assert assets["MTU"].event_cps == (1.0,)
        assert veability(assets["MTU"]) == pytest.approx(10 - (9 + 4.5 + 10) / 3)
        assert veability(assets["link"]) == pytest.approx(10 - 7 / 3)

    def test_events_without_report(self, fixtures_dir):
        raw = json.loads((fixtures_dir / "assets_from_report.json").read_text(encoding="utf-8"))
        with pytest.raises(MetricsConfigViolation) as exc_info:
            build_assets(raw)
        assert len(exc_info.value.violations) == 2

    def test_unknown_event(self):
        raw = {"assets": [{"asset_id": "a", "services_on_asset": 0,
                           "network_services_total": 1, "events": ["99"]}]}
        with pytest.raises(MetricsConfigViolation):
            build_assets(raw, cps_from_report(_CASE_STUDY_REPORT))

    def test_service_counts_must_be_whole(self):
        raw = {"assets": [{"asset_id": "a", "services_on_asset": 1.5, "network_services_total": 2}]}
        with pytest.raises(MetricsConfigViolation) as exc_info:
            build_assets(raw)
        assert "whole count" in exc_info.value.violations[0]["detail"]
        raw["assets"][0]["services_on_asset"] = 1.0
        assert build_assets(raw)[0].services_on_asset == 1


class TestMetricProperties:

    def test_mape_ignores_pair_order_and_common_scale(self, rng):
        for _ in range(500):
            n = rng.randint(1, 10)
            actual = [rng.uniform(1, 100) * rng.choice([-1, 1]) for _ in range(n)]
            computed = [rng.uniform(-100, 100) for _ in range(n)]
            base = mape(actual, computed)
            pairs = list(zip(actual, computed))
            rng.shuffle(pairs)
            assert mape([a for a, _ in pairs], [c for _, c in pairs]) == pytest.approx(base)
            k = rng.uniform(0.01, 50)
            assert mape([a * k for a in actual], [c * k for c in computed]) == pytest.approx(base)

    def test_maxion_townsend_is_strictly_monotone(self, rng):
        for _ in range(500):
            fp_low, fp_high = sorted(rng.sample(range(101), 2))
            hit = rng.uniform(0, 100)
            assert (maxion_townsend(DetectionStats(fp_low, hit))
                    < maxion_townsend(DetectionStats(fp_high, hit)))
            hit_low, hit_high = sorted(rng.sample(range(101), 2))
            fp = rng.uniform(0, 100)
            assert (maxion_townsend(DetectionStats(fp, hit_low))
                    > maxion_townsend(DetectionStats(fp, hit_high)))

    def test_veability_decreases_in_each_dimension(self, rng):
        for _ in range(1000):
            dims = [rng.uniform(0, 10) for _ in range(3)]
            score = veability_from_dims(*dims)
            assert 0 <= score <= 10
            i = rng.randrange(3)
            raised = list(dims)
            raised[i] = rng.uniform(dims[i], 10) + 1e-9
            assert veability_from_dims(*raised) < score

    def test_vulnerability_dim_dominates_each_severity(self, rng):
        for _ in range(500):
            vulns = tuple(
                VulnerabilityScore(f"v{i}", rng.uniform(0, 10), rng.uniform(0, 10), rng.uniform(0, 10))
                for i in range(rng.randint(1, 6))
            )
            dim = vulnerability_dim(AssetProfile("a", vulns, services_on_asset=1, network_services_total=1))
            assert max(severity(v) for v in vulns) <= dim + 1e-9
            assert dim <= 10


# ═══════════════════════════════════════════════════════════════════
#  4. Metric suite
# ═══════════════════════════════════════════════════════════════════

class TestMetricSuite:

    def test_fixture_document(self, fixtures_dir):
        rows = load_metrics(fixtures_dir / "metrics.json")
        values = _rows_by_key(rows)
        assert values[("mape", "identical")] == 0.0
        assert values[("relative_improvement_pct", "DOS")] == pytest.approx(59.80, abs=0.01)
        assert values[("maxion_townsend_cost", "Suricata")] == 385
        assert values[("maxion_townsend_cost", "HRCT")] == 88
        assert values[("accuracy_delta_pts", "Turnipseed")] == pytest.approx(-2.45)
        assert values[("combined_time_reduction_pct", "Gao")] == pytest.approx(53.47)
        assert values[("veability", "historian")] == 10.0
        assert values[("veability", "MTU")] == pytest.approx(10 - 26 / 3)

    def test_section_order(self, fixtures_dir):
        rows = load_metrics(fixtures_dir / "metrics.json")
        metrics = [r.metric for r in rows]
        assert metrics[0] == "mape"
        assert metrics.index("relative_improvement_pct") < metrics.index("maxion_townsend_cost")
        assert metrics[-1] == "veability"

    def test_explicit_assets_replace_document(self, fixtures_dir):
        assets = [AssetProfile("solo", network_services_total=1)]
        rows = run_metrics({"veability": {"assets": "missing.json"}}, fixtures_dir, assets=assets)
        assert {r.subject for r in rows} == {"solo"}

    def test_shape_violations(self):
        raw = {"improvements": [{"subject": "x", "baseline": "high"}],
               "mape": [{"subject": "m", "actual": [1], "computed": "1"}],
               "bogus": []}
        where = {v["where"] for v in validate_metrics_dict(raw)}
        assert where == {"bogus", "improvements[0]", "mape[0]"}
        with pytest.raises(MetricsConfigViolation):
            run_metrics(raw)

    def test_arithmetic_errors_surface(self):
        with pytest.raises(NonpositiveBaseline):
            run_metrics({"improvements": [{"subject": "x", "baseline": 0, "ours": 1}]})

    def test_empty_document(self):
        assert run_metrics({}) == []
