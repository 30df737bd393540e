"""Tests for quantization, stream merging, the state database and compression."""
from __future__ import annotations

import json
import math

import pytest

from dqsca.compression import PathEntry, StatePath, compress_path, compress_with_counts, export_paths_csv
from dqsca.merge import (
    DuplicateSensorId,
    NoPriorSample,
    NoStreams,
    UnsortedStream,
    merge_streams,
    select_baseline,
)
from dqsca.pipeline import ReductionStats, refresh_quantization, run_dqsca
from dqsca.quantization import (
    ABSENT_CODE,
    MissingFeature,
    QuantizationError,
    SpecViolation,
    UnmappedCategoricalValue,
    build_spec,
    format_code_vector,
    list_specs,
    load_spec,
    quantize_row,
    quantize_value,
)
from dqsca.state_db import StateDatabase, StateDatabaseError, map_to_state
from ingest.arff import parse_arff_dataset
from schemas.domain import AttackLabels, MeasurementRow


# ═══════════════════════════════════════════════════════════════════
#  Helpers
# ═══════════════════════════════════════════════════════════════════

def _load_rows(fixtures_dir, name: str, sensor_id: str = "arff") -> list[MeasurementRow]:
    with open(fixtures_dir / name, encoding="utf-8") as f:
        return parse_arff_dataset(f, sensor_id=sensor_id).rows


def _single_feature_spec(thresholds=(16, 46)) -> dict:
    count = len(thresholds) + 1
    return {
        "spec_id": "mini",
        "features": [
            {"name": "length", "kind": "integer",
             "interval_names": [f"I{i}" for i in range(count)],
             "enumerations": list(range(count)),
             "thresholds": list(thresholds)},
            {"name": "mode", "kind": "categorical",
             "interval_names": ["Off", "Auto"], "enumerations": [0, 1],
             "value_map": {"off": 0, "auto": 1}},
        ],
    }


def _row(t: float, sensor: str = "s1", **values) -> MeasurementRow:
    return MeasurementRow(values=values, timestamp=t, sensor_id=sensor)


# ═══════════════════════════════════════════════════════════════════
#  1. Quantization
# ═══════════════════════════════════════════════════════════════════

class TestQuantizeValue:

    @pytest.fixture
    def length(self):
        return build_spec(_single_feature_spec())["length"]

    @pytest.mark.parametrize("value,code", [
        (0, 0), (16, 0), (17, 1), (45.9, 1), (46, 2), (1000, 2),
    ])
    def test_threshold_boundaries(self, length, value, code):
        assert quantize_value(value, length) == code

    def test_absent_value(self, length):
        assert quantize_value(None, length) == ABSENT_CODE
        assert quantize_value(math.nan, length) == ABSENT_CODE

    def test_non_numeric_value(self, length):
        with pytest.raises(QuantizationError):
            quantize_value("tall", length)

    def test_categorical_lookup_is_case_insensitive(self):
        mode = build_spec(_single_feature_spec())["mode"]
        assert quantize_value("Auto", mode) == 1
        with pytest.raises(UnmappedCategoricalValue):
            quantize_value("manual", mode)

    def test_boolean_accepts_words(self):
        pump = load_spec("turnipseed_v1")["pump"]
        assert quantize_value(True, pump) == 1
        assert quantize_value("off", pump) == 0
        assert quantize_value(1.0, pump) == 1


class TestSpecLoading:

    def test_shipped_specs(self):
        assert {"turnipseed_v1", "gao_v1"} <= set(list_specs())
        spec = load_spec("gao_v1")
        assert spec.tag == "gao-v1"
        assert len(spec.selected_features) == 15

    def test_bad_spec_fixture(self, fixtures_dir):
        with pytest.raises(SpecViolation) as exc_info:
            load_spec(fixtures_dir / "bad_spec.json")
        fields = {v["field"] for v in exc_info.value.violations}
        assert "thresholds" in fields

    def test_violations_are_collected(self):
        raw = _single_feature_spec()
        raw["features"][0]["enumerations"] = [0, 1]
        raw["features"][1]["value_map"] = {"off": 0, "auto": 7}
        raw["selected_features"] = ["length", "ghost"]
        with pytest.raises(SpecViolation) as exc_info:
            build_spec(raw)
        where = {(v["feature"], v["field"]) for v in exc_info.value.violations}
        assert ("length", "enumerations") in where
        assert ("mode", "value_map") in where
        assert ("ghost", "selected_features") in where

    def test_negative_enumeration_rejected(self):
        raw = _single_feature_spec()
        raw["features"][1]["enumerations"] = [-1, 1]
        raw["features"][1]["value_map"] = {"off": -1, "auto": 1}
        with pytest.raises(SpecViolation):
            build_spec(raw)

    def test_unknown_spec_name(self):
        with pytest.raises(FileNotFoundError):
            load_spec("no_such_spec")

    def test_with_thresholds_renumbers(self):
        spec = build_spec(_single_feature_spec())
        changed = spec.with_thresholds({"length": [10, 20, 30]})
        assert changed["length"].enumerations == (0, 1, 2, 3)
        assert changed["length"].interval_names == ("I0", "I1", "I2", "I3")
        with pytest.raises(SpecViolation):
            spec.with_thresholds({"length": [30, 10]})


class TestQuantizeRow:

    def test_turnipseed_rows_share_one_state(self, fixtures_dir):
        spec = load_spec("turnipseed_v1")
        rows = _load_rows(fixtures_dir, "turnipseed_sample.arff")
        codes = {format_code_vector(quantize_row(r, spec, spec.selected_features)) for r in rows}
        assert codes == {"2,0,2,0,1,0,0,0,0,2"}

    def test_gao_rows_share_one_state(self, fixtures_dir):
        spec = load_spec("gao_v1")
        rows = _load_rows(fixtures_dir, "gao_sample.arff")
        codes = {format_code_vector(quantize_row(r, spec, spec.selected_features)) for r in rows}
        assert codes == {"0,1,1,0,0,3,3,0,0,0,0,1,0,0,1"}

    def test_missing_feature(self):
        spec = build_spec(_single_feature_spec())
        with pytest.raises(MissingFeature):
            quantize_row(_row(0, length=3), spec, ["length", "mode"])
        with pytest.raises(MissingFeature):
            quantize_row(_row(0, length=3, depth=1), spec, ["depth"])

    def test_order_follows_selection(self):
        spec = build_spec(_single_feature_spec())
        row = _row(0, length=50, mode="off")
        assert quantize_row(row, spec, ["mode", "length"]) == (0, 2)

    def test_empty_selection(self):
        spec = build_spec(_single_feature_spec())
        assert quantize_row(_row(0, length=50, mode="off"), spec, []) == ()


# ═══════════════════════════════════════════════════════════════════
#  2. Merging
# ═══════════════════════════════════════════════════════════════════

class TestMergeStreams:

    @pytest.fixture
    def streams(self):
        fast = [_row(t, "s1", a=t) for t in (0.0, 1.0, 2.0, 3.0)]
        slow = [_row(t, "s2", b=t) for t in (0.5, 2.5)]
        return [("s2", slow), ("s1", fast)]

    def test_baseline_is_fastest(self, streams):
        assert select_baseline(streams) == "s1"

    def test_baseline_tie_goes_to_lowest_id(self):
        rows = [_row(0), _row(1)]
        assert select_baseline([("zeta", rows), ("alpha", rows)]) == "alpha"

    def test_carry_forward(self, streams):
        merged = merge_streams(streams)
        assert [r.timestamp for r in merged] == [0.0, 1.0, 2.0, 3.0]
        assert [r.values["b"] for r in merged] == [None, 0.5, 0.5, 2.5]
        assert [r.values["a"] for r in merged] == [0.0, 1.0, 2.0, 3.0]
        assert {r.sensor_id for r in merged} == {"s1+s2"}

    def test_missing_prior_sample_can_be_an_error(self, streams):
        with pytest.raises(NoPriorSample):
            merge_streams(streams, on_missing="error")

    def test_labels_carried_when_baseline_has_none(self):
        labels = AttackLabels("Normal", "Normal", 0)
        fast = [_row(t, "s1", a=1) for t in (1.0, 2.0, 3.0)]
        slow = [MeasurementRow({"b": 1}, 0.0, labels, "s2")]
        merged = merge_streams([("s1", fast), ("s2", slow)])
        assert all(r.labels == labels for r in merged)

    def test_single_stream_passes_through(self):
        rows = [_row(0, a=1), _row(1, a=2)]
        assert merge_streams([("s1", rows)]) == rows

    def test_no_streams(self):
        with pytest.raises(NoStreams):
            merge_streams([("s1", [])])

    def test_unsorted_stream(self):
        with pytest.raises(UnsortedStream):
            merge_streams([("s1", [_row(2), _row(1)])])

    def test_identical_timestamps_give_column_union(self):
        ts = (0.0, 1.0, 2.0)
        left = [_row(t, "s1", pressure=t) for t in ts]
        right = [_row(t, "s2", pump=int(t) % 2) for t in ts]
        merged = merge_streams([("s1", left), ("s2", right)])
        assert [r.timestamp for r in merged] == list(ts)
        assert [dict(r.values) for r in merged] == [
            {"pressure": t, "pump": int(t) % 2} for t in ts]

    def test_duplicate_sensor_id(self):
        fast = [_row(t, "s1", pressure=t) for t in (0.0, 1.0, 2.0, 3.0)]
        slow = [_row(t, "s1", pump=1) for t in (0.0, 2.0)]
        with pytest.raises(DuplicateSensorId):
            merge_streams([("s1", fast), ("s1", slow)])


# ═══════════════════════════════════════════════════════════════════
#  3. State database
# ═══════════════════════════════════════════════════════════════════

class TestStateDatabase:

    def test_indices_assigned_in_first_seen_order(self):
        db = StateDatabase(start_index=5)
        assert map_to_state((1, 2), db).index == 5
        assert map_to_state((0, 0), db).index == 6
        assert map_to_state((1, 2), db).index == 5
        assert db.next_index == 7
        assert len(db) == 2

    def test_negative_start(self):
        with pytest.raises(StateDatabaseError):
            StateDatabase(start_index=-1)

    def test_csv_export_and_import(self):
        db = StateDatabase()
        for vec in [(2, 0), (0, 1), (1, 1)]:
            db.map(vec)
        text = db.export_csv()
        assert text.splitlines()[0] == "index,code_vector"
        assert text.splitlines()[1] == '0,"2,0"'
        restored = StateDatabase.from_csv(text)
        assert [(s.index, s.code_vector) for s in restored] == [(s.index, s.code_vector) for s in db]
        assert restored.map((9, 9)).index == 3

    def test_import_rejects_duplicates(self):
        with pytest.raises(StateDatabaseError):
            StateDatabase.from_csv('index,code_vector\n0,"1,1"\n1,"1,1"\n')
        with pytest.raises(StateDatabaseError):
            StateDatabase.from_csv("index,code_vector\nzero,1\n")


# ═══════════════════════════════════════════════════════════════════
#  4. Compression
# ═══════════════════════════════════════════════════════════════════

class TestCompression:

    def test_consecutive_repeats_collapse(self):
        path = StatePath("p", [PathEntry(0, 0), PathEntry(0, 1), PathEntry(1, 2),
                               PathEntry(1, 3), PathEntry(0, 4)])
        assert compress_path(path).state_indices == [0, 1, 0]

    def test_window_limits_collapse(self):
        path = StatePath("p", [PathEntry(0, 0), PathEntry(0, 1), PathEntry(0, 5)])
        assert [e.timestamp for e in compress_path(path, window=2).entries] == [0, 5]
        assert len(compress_path(path, window=0)) == 3

    def test_labels_keep_entries_apart(self):
        path = StatePath("p", [PathEntry(0, 0, "Normal"), PathEntry(0, 1, "DenialOfService")])
        assert len(compress_path(path)) == 2

    def test_duplicate_versus_combined(self):
        path = StatePath("p", [PathEntry(0, 0, raw=(1,)), PathEntry(0, 1, raw=(1,)),
                               PathEntry(0, 2, raw=(2,))])
        compressed, counts = compress_with_counts(path)
        assert len(compressed) == 1 and compressed.compressed
        assert (counts.duplicates_removed, counts.rows_combined) == (1, 1)

    def test_decreasing_timestamps_rejected(self):
        with pytest.raises(ValueError):
            StatePath("p", [PathEntry(0, 2), PathEntry(1, 1)])

    def test_negative_window_rejected(self):
        with pytest.raises(ValueError):
            compress_path(StatePath("p"), window=-1)

    def test_export_csv(self):
        text = export_paths_csv([StatePath("p", [PathEntry(3, 1.5, "Normal"), PathEntry(4, 2)])])
        assert text.splitlines() == [
            "scenario_id,state_index,timestamp,label",
            "p,3,1.5,Normal",
            "p,4,2.0,",
        ]


# ═══════════════════════════════════════════════════════════════════
#  5. Pipeline and statistics
# ═══════════════════════════════════════════════════════════════════

class TestReductionStats:

    def test_reported_pipeline_totals(self):
        stats = ReductionStats.from_counts(274627, 179328)
        assert stats.reduction_percent == pytest.approx(34.70, abs=0.01)

    def test_duplicate_split(self):
        stats = ReductionStats.from_counts(97019, 70242, duplicates=31)
        assert stats.rows_combined == 26746
        assert stats.as_dict()["reduction_percent"] == pytest.approx(27.6, abs=0.01)

    def test_inconsistent_counts(self):
        with pytest.raises(ValueError):
            ReductionStats(10, 12)
        with pytest.raises(ValueError):
            ReductionStats(10, 5, 1, 1)

    def test_empty_input(self):
        assert ReductionStats(0, 0).reduction_percent == 0.0


class TestRunDqsca:

    def test_duplicate_fixture(self, fixtures_dir):
        spec = load_spec("gao_v1")
        rows = _load_rows(fixtures_dir, "gao_duplicates.arff")
        db, paths, stats = run_dqsca([("arff", rows)], spec)
        assert (stats.original_count, stats.retained_count) == (35, 3)
        assert (stats.duplicates_removed, stats.rows_combined) == (31, 1)
        assert paths[0].state_indices == [0, 1, 0]
        assert len(db) == 2

    def test_window_zero_keeps_everything(self, fixtures_dir):
        spec = load_spec("gao_v1")
        rows = _load_rows(fixtures_dir, "gao_duplicates.arff")
        result = run_dqsca([("arff", rows)], spec, window=0)
        assert result.stats.retained_count == 35

    def test_shared_database_across_runs(self, fixtures_dir):
        spec = load_spec("gao_v1")
        first = run_dqsca([("arff", _load_rows(fixtures_dir, "gao_sample.arff"))], spec)
        second = run_dqsca([("arff", _load_rows(fixtures_dir, "gao_duplicates.arff"))], spec, db=first.db)
        assert len(second.db) == 2
        assert second.paths[0].state_indices[0] == 0

    def test_feature_mismatch_with_existing_db(self, fixtures_dir):
        spec = load_spec("gao_v1")
        db = StateDatabase(features=["setpoint"])
        with pytest.raises(ValueError):
            run_dqsca([("arff", _load_rows(fixtures_dir, "gao_sample.arff"))], spec, db=db)

    def test_worker_count_does_not_change_output(self, fixtures_dir):
        spec = load_spec("gao_v1")
        scenarios = {
            "dup": [("arff", _load_rows(fixtures_dir, "gao_duplicates.arff"))],
            "sample": [("arff", _load_rows(fixtures_dir, "gao_sample.arff"))],
        }
        serial = run_dqsca(scenarios, spec, workers=1)
        pooled = run_dqsca(scenarios, spec, workers=4)
        assert serial.db.export_csv() == pooled.db.export_csv()
        assert export_paths_csv(serial.paths) == export_paths_csv(pooled.paths)
        assert serial.per_scenario == pooled.per_scenario


class TestRefreshQuantization:

    @pytest.fixture
    def reduced(self, fixtures_dir):
        spec = load_spec("gao_v1")
        return run_dqsca([("arff", _load_rows(fixtures_dir, "gao_duplicates.arff"))], spec), spec

    def test_unchanged_thresholds_give_identity(self, reduced):
        result, spec = reduced
        new_db, _, remap = refresh_quantization(result.db, spec, {"setpoint": [20]})
        assert remap == {0: (0,), 1: (1,)}
        assert new_db.export_csv() == result.db.export_csv()

    def test_coarser_thresholds_merge_states(self, reduced):
        result, spec = reduced
        new_db, _, remap = refresh_quantization(result.db, spec, {"setpoint": [40]})
        assert remap == {0: (0,), 1: (0,)}
        assert len(new_db) == 1

    def test_interval_count_change(self, reduced):
        result, spec = reduced
        _, new_spec, remap = refresh_quantization(result.db, spec, {"setpoint": [22, 27]})
        assert new_spec["setpoint"].enumerations == (0, 1, 2)
        assert remap == {0: (0,), 1: (1,)}

    def test_imported_states_have_no_raw_rows(self, reduced):
        result, spec = reduced
        imported = StateDatabase.from_csv(result.db.export_csv(), features=result.db.features)
        new_db, _, remap = refresh_quantization(imported, spec, {"setpoint": [20]})
        assert remap == {0: (), 1: ()}
        assert len(new_db) == 0

    def test_spec_file_round_trip(self, reduced, tmp_path):
        _, spec = reduced
        p = tmp_path / "spec.json"
        p.write_text(json.dumps(spec.to_dict()), encoding="utf-8")
        assert load_spec(p) == spec
