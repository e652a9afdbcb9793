"""Scenario document loading, validation codes, and serialization."""
from __future__ import annotations

import json
import math

import pytest

from wiredrive.model import (
    BAD_TYPE,
    BAD_VALUE,
    DUPLICATE_WIRE_ID,
    MISSING_KEY,
    PARSE_ERROR,
    UNKNOWN_KEY,
    UNRESOLVED_REFERENCE,
    ScenarioError,
    load_scenario,
    scenario_from_dict,
    scenario_to_dict,
    serialize_scenario,
    validate_scenario,
)
from wiredrive.scenarios import builtin_scenario, builtin_scenario_names


def pull_up_doc() -> dict:
    return scenario_to_dict(builtin_scenario("pull_up"))


def codes_from(doc) -> set[str]:
    with pytest.raises(ScenarioError) as err:
        scenario_from_dict(doc)
    return {v.code for v in err.value.violations}


def test_builtin_names_are_stable():
    assert builtin_scenario_names() == ("kick", "pull_up", "rising")


def test_builtins_validate_cleanly():
    for name in builtin_scenario_names():
        assert validate_scenario(builtin_scenario(name)) == []


def test_duplicate_wire_id_is_reported():
    doc = pull_up_doc()
    doc["wires"][1]["id"] = doc["wires"][0]["id"]
    assert DUPLICATE_WIRE_ID in codes_from(doc)


def test_duplicate_wire_id_message_names_the_code():
    doc = pull_up_doc()
    doc["wires"][1]["id"] = doc["wires"][0]["id"]
    with pytest.raises(ScenarioError) as err:
        scenario_from_dict(doc)
    assert "DuplicateWireId" in str(err.value)


def test_unknown_key_is_reported():
    doc = pull_up_doc()
    doc["constants"]["graivty"] = 9.81
    assert UNKNOWN_KEY in codes_from(doc)


def test_missing_key_is_reported():
    doc = pull_up_doc()
    del doc["segments"][0]["mass"]
    assert MISSING_KEY in codes_from(doc)


def test_bad_type_is_reported():
    doc = pull_up_doc()
    doc["constants"]["gravity"] = "downhill"
    assert BAD_TYPE in codes_from(doc)


def test_bad_value_is_reported():
    doc = pull_up_doc()
    doc["joints"][0]["torque_limit"] = -5.0
    assert BAD_VALUE in codes_from(doc)


def test_negative_timestep_is_rejected():
    doc = pull_up_doc()
    doc["sim"]["dt"] = -0.001
    assert codes_from(doc) == {"TimestepOutOfRange"}


def test_unresolved_reference_is_reported():
    doc = pull_up_doc()
    doc["phases"][0]["compensation"] = [55]
    assert UNRESOLVED_REFERENCE in codes_from(doc)


def test_parse_error_on_malformed_text():
    with pytest.raises(ScenarioError) as err:
        load_scenario("{not json")
    assert {v.code for v in err.value.violations} == {PARSE_ERROR}


def test_load_of_serialized_builtin_round_trips():
    for name in builtin_scenario_names():
        text = serialize_scenario(builtin_scenario(name))
        assert serialize_scenario(load_scenario(text)) == text


def test_serialized_form_is_json_with_schema_top_keys():
    doc = json.loads(serialize_scenario(builtin_scenario("pull_up")))
    assert {"meta", "constants", "segments", "joints",
            "wires", "phases", "sim"} <= set(doc)


def test_total_mass_rescales_segment_masses_proportionally():
    base = builtin_scenario("pull_up")
    doc = pull_up_doc()
    doc["constants"]["total_mass"] = 60.0
    heavy = scenario_from_dict(doc)
    assert math.isclose(sum(s.mass for s in heavy.segments), 60.0,
                        rel_tol=1e-12)
    ratio = 60.0 / sum(s.mass for s in base.segments)
    for a, b in zip(base.segments, heavy.segments):
        assert math.isclose(b.mass, a.mass * ratio, rel_tol=1e-12)


def test_gains_node_overrides_controller_gains():
    doc = pull_up_doc()
    doc["gains"] = {"kp": 321.0, "kd": 12.5}
    s = scenario_from_dict(doc)
    assert s.gains.kp == 321.0 and s.gains.kd == 12.5


def test_error_collects_every_violation_not_just_the_first():
    doc = pull_up_doc()
    doc["constants"]["gravity"] = "downhill"
    doc["sim"]["dt"] = "fast"
    with pytest.raises(ScenarioError) as err:
        scenario_from_dict(doc)
    paths = {v.path for v in err.value.violations}
    assert {"constants.gravity", "sim.dt"} <= paths
