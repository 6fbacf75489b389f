"""Scenario parsing: strictness, defaults, validation, canonical round-trip."""

import copy
import json

import pytest

from wnslab.scenario import ScenarioError, canonical, dump_file, parse_file, parse_obj

MINIMAL = {
    "wns": {
        "id": 1,
        "coordinator": 1,
        "channels": [11],
        "params": {
            "omission_bound": 1, "max_inaccess": 0, "failed_channels": 0,
            "consecutive_bound": 1, "observation_window": 4000,
            "tx_delay": 1000, "inaccess_budget": 2000,
        },
        "nodes": [
            {"id": 1, "position": [0.0, 0.0],
             "range": {"center": [0.0, 0.0], "semi_major": 50.0, "semi_minor": 40.0}},
        ],
    },
    "horizon": 10000,
}


class TestParse:
    def test_minimal_scenario_parses(self):
        sc = parse_obj(copy.deepcopy(MINIMAL))
        assert sc.wns.coordinator_id == 1
        assert sc.seed == 0  # documented default
        assert sc.switch.silence_timeout == 2000  # default 2 * tx_delay
        assert sc.switch.announce_repeats == 2  # default omission_bound + 1

    def test_unknown_top_level_key_rejected(self):
        obj = copy.deepcopy(MINIMAL)
        obj["surprise"] = 1
        with pytest.raises(ScenarioError, match="unknown keys"):
            parse_obj(obj)

    def test_unknown_nested_key_rejected(self):
        obj = copy.deepcopy(MINIMAL)
        obj["wns"]["params"]["typo_key"] = 3
        with pytest.raises(ScenarioError, match="typo_key"):
            parse_obj(obj)

    def test_missing_required_key_rejected(self):
        obj = copy.deepcopy(MINIMAL)
        del obj["wns"]["channels"]
        with pytest.raises(ScenarioError, match="channels"):
            parse_obj(obj)

    def test_channel_count_must_match_failure_budget(self):
        obj = copy.deepcopy(MINIMAL)
        obj["wns"]["params"]["failed_channels"] = 2
        obj["wns"]["channels"] = [11, 12]
        with pytest.raises(ScenarioError, match="failed_channels"):
            parse_obj(obj)

    def test_node_needs_exactly_one_range_form(self):
        obj = copy.deepcopy(MINIMAL)
        node = obj["wns"]["nodes"][0]
        node["ranges"] = {"11": dict(node["range"])}
        with pytest.raises(ScenarioError, match="exactly one"):
            parse_obj(obj)

    def test_per_channel_ranges_accepted(self):
        obj = copy.deepcopy(MINIMAL)
        node = obj["wns"]["nodes"][0]
        node["ranges"] = {"11": node.pop("range")}
        sc = parse_obj(obj)
        assert 11 in sc.wns.members[0].ranges

    def test_syntax_error_carries_line_number(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{\n  "wns": [,]\n}\n')
        with pytest.raises(ScenarioError, match="line 2"):
            parse_file(path)

    def test_bundled_scenario_parses(self, tmp_path, faultfree_obj):
        sc = parse_obj(copy.deepcopy(faultfree_obj))
        assert len(sc.wns.members) == 5


class TestValidation:
    def test_infeasible_deadline_rejected(self):
        obj = copy.deepcopy(MINIMAL)
        obj["workload"] = [
            {"sender": 1, "payload_size": 0, "send_time": 0, "deadline": 10}]
        with pytest.raises(ScenarioError, match="deadline infeasible"):
            parse_obj(obj)

    def test_send_beyond_horizon_rejected(self):
        obj = copy.deepcopy(MINIMAL)
        obj["workload"] = [
            {"sender": 1, "payload_size": 0, "send_time": 99999,
             "deadline": 999999}]
        with pytest.raises(ScenarioError, match="horizon"):
            parse_obj(obj)

    def test_switch_blackout_must_fit_budget(self):
        obj = copy.deepcopy(MINIMAL)
        obj["wns"]["params"]["inaccess_budget"] = 100
        with pytest.raises(ScenarioError, match="inaccess_budget"):
            parse_obj(obj)

    def test_overlapping_windows_rejected(self):
        obj = copy.deepcopy(MINIMAL)
        obj["faults"] = {"inaccessibility": [
            {"start": 0, "end": 100}, {"start": 50, "end": 150}]}
        with pytest.raises(ScenarioError, match="overlap"):
            parse_obj(obj)

    def test_malformed_interval_rejected(self):
        obj = copy.deepcopy(MINIMAL)
        obj["faults"] = {"inaccessibility": [{"start": 100, "end": 100}]}
        with pytest.raises(ScenarioError, match="well-formed"):
            parse_obj(obj)

    def test_unknown_fault_channel_rejected(self):
        obj = copy.deepcopy(MINIMAL)
        obj["faults"] = {"channel_failures": [
            {"channel": 99, "start": 0, "end": 10}]}
        with pytest.raises(ScenarioError, match="unknown channel"):
            parse_obj(obj)


class TestCanonical:
    def test_round_trip_is_structurally_identical(self, faultfree_obj):
        sc = parse_obj(copy.deepcopy(faultfree_obj))
        again = parse_obj(canonical(sc))
        assert again == sc

    def test_dump_and_reparse(self, tmp_path, faultfree_obj):
        sc = parse_obj(copy.deepcopy(faultfree_obj))
        path = tmp_path / "canon.json"
        dump_file(sc, path)
        assert parse_file(path) == sc

    def test_canonical_is_json_stable(self, faultfree_obj):
        sc = parse_obj(copy.deepcopy(faultfree_obj))
        a = json.dumps(canonical(sc), sort_keys=True)
        b = json.dumps(canonical(parse_obj(canonical(sc))), sort_keys=True)
        assert a == b
