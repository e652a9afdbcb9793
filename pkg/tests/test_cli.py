"""Command-line interface: exit codes, overrides, outputs, determinism."""
from __future__ import annotations

import json
import os

import pytest

from wiredrive.cli import OverrideError, apply_overrides, main, parse_override
from wiredrive.engine import parse_csv
from wiredrive.model import load_scenario


# ---------------------------------------------------------------------------
# override parsing


def test_override_values_parse_as_json_when_possible():
    assert parse_override("constants.total_mass=60") == (
        "constants.total_mass", 60)
    assert parse_override("sim.dt=0.0005") == ("sim.dt", 0.0005)
    assert parse_override("contact.enabled=false") == (
        "contact.enabled", False)
    assert parse_override("meta.name=bespoke") == ("meta.name", "bespoke")
    assert parse_override("sim.base_position=[0,0,2]") == (
        "sim.base_position", [0, 0, 2])


def test_override_without_equals_is_rejected():
    with pytest.raises(OverrideError):
        parse_override("constants.total_mass")
    with pytest.raises(OverrideError):
        parse_override("=60")


def test_overrides_descend_dicts_and_lists():
    doc = {"wires": [{"id": 1}, {"id": 2}], "sim": {"dt": 0.001}}
    apply_overrides(doc, [("wires.1.id", 9), ("sim.dt", 0.01)])
    assert doc["wires"][1]["id"] == 9
    assert doc["sim"]["dt"] == 0.01


def test_override_list_index_errors_are_structured():
    doc = {"wires": [{"id": 1}]}
    with pytest.raises(OverrideError):
        apply_overrides(doc, [("wires.7.id", 9)])
    with pytest.raises(OverrideError):
        apply_overrides(doc, [("wires.x.id", 9)])
    with pytest.raises(OverrideError):
        apply_overrides(doc, [("wires.0.id.deeper", 9)])


def test_overrides_may_fill_in_optional_nodes():
    doc = {"sim": {"dt": 0.001}}
    apply_overrides(doc, [("gains.kp", 800.0)])
    assert doc["gains"] == {"kp": 800.0}


# ---------------------------------------------------------------------------
# command surface


def test_list_prints_the_builtins(capsys):
    assert main(["list"]) == 0
    assert capsys.readouterr().out.split() == ["kick", "pull_up", "rising"]


def test_unknown_command_exits_2(capsys):
    assert main(["frobnicate"]) == 2
    assert "usage:" in capsys.readouterr().err


def test_unknown_flag_exits_2(capsys):
    assert main(["run", "--frobnicate"]) == 2
    assert "usage:" in capsys.readouterr().err


def test_no_arguments_exits_2(capsys):
    assert main([]) == 2
    assert "usage:" in capsys.readouterr().err


def test_help_exits_0(capsys):
    assert main(["--help"]) == 0
    out = capsys.readouterr().out
    for command in ("run", "validate", "emit-scenario", "list"):
        assert command in out


def test_run_without_a_scenario_exits_2(capsys):
    assert main(["run"]) == 2


def test_malformed_set_flag_exits_2(capsys):
    assert main(["run", "--builtin", "pull_up", "--set", "nonsense"]) == 2


def test_emit_scenario_writes_a_loadable_file(tmp_path, capsys):
    assert main(["emit-scenario", "pull_up", "-o", str(tmp_path)]) == 0
    path = capsys.readouterr().out.strip()
    assert path.endswith("pull_up.scn.json")
    scenario = load_scenario(open(path).read())
    assert scenario.meta.name == "pull_up"


def test_validate_accepts_a_clean_file(tmp_path, capsys):
    assert main(["emit-scenario", "rising", "-o", str(tmp_path)]) == 0
    path = capsys.readouterr().out.strip()
    assert main(["validate", path]) == 0
    assert "OK" in capsys.readouterr().out


def test_validate_reports_duplicate_wire_ids(tmp_path, capsys):
    assert main(["emit-scenario", "pull_up", "-o", str(tmp_path)]) == 0
    path = capsys.readouterr().out.strip()
    doc = json.loads(open(path).read())
    doc["wires"][1]["id"] = doc["wires"][0]["id"]
    bad = tmp_path / "bad.scn"
    bad.write_text(json.dumps(doc))
    assert main(["validate", str(bad)]) == 1
    err = capsys.readouterr().err
    assert "DuplicateWireId" in err


def test_validate_missing_file_exits_1(tmp_path, capsys):
    assert main(["validate", str(tmp_path / "nope.scn")]) == 1
    assert "cannot read" in capsys.readouterr().err


def test_run_missing_file_exits_1(tmp_path, capsys):
    assert main(["run", str(tmp_path / "nope.scn"), "-o", str(tmp_path)]) == 1
    assert "error" in capsys.readouterr().err


def test_run_writes_csv_and_manifest(tmp_path, capsys):
    code = main(["run", "--builtin", "pull_up", "-o", str(tmp_path),
                 "--set", "sim.duration=0.3", "--no-plots"])
    assert code == 0
    log = parse_csv(str(tmp_path / "trajectory.csv"))
    assert log.t[-1] == pytest.approx(0.3)
    manifest = json.loads((tmp_path / "run-manifest.json").read_text())
    assert manifest["scenario"] == "pull_up"
    assert manifest["duration"] == 0.3
    assert "scenario_hash" in manifest and "package_version" in manifest
    assert "wall_time_s" in manifest


def test_run_writes_plots_by_default(tmp_path):
    code = main(["run", "--builtin", "pull_up", "-o", str(tmp_path),
                 "--set", "sim.duration=0.05"])
    assert code == 0
    for stem in ("trajectory_pose.svg", "trajectory_lengths.svg",
                 "trajectory_tensions.svg"):
        assert (tmp_path / stem).exists()


def test_mass_override_shifts_the_first_row_feedforward(tmp_path):
    code = main(["run", "--builtin", "pull_up", "-o", str(tmp_path),
                 "--set", "constants.total_mass=60",
                 "--set", "sim.duration=0.05", "--no-plots"])
    assert code == 0
    log = parse_csv(str(tmp_path / "trajectory.csv"))
    first = [v for v in log.f_ref[0] if v != 0.0]
    assert len(first) == 4
    for value in first:
        assert value == pytest.approx(60 * 9.81 / 4, abs=1e-9)
        assert abs(value - 147.2) < 0.1


def test_unknown_override_key_is_a_scenario_error(tmp_path, capsys):
    code = main(["run", "--builtin", "pull_up", "-o", str(tmp_path),
                 "--set", "constants.graivty=9.0", "--no-plots"])
    assert code == 1
    assert "UnknownKey" in capsys.readouterr().err


def test_same_invocation_reproduces_the_same_csv(tmp_path):
    args = ["run", "--builtin", "pull_up", "--set", "sim.duration=0.3",
            "--no-plots"]
    assert main(args + ["-o", str(tmp_path / "a")]) == 0
    assert main(args + ["-o", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "trajectory.csv").read_bytes()
    b = (tmp_path / "b" / "trajectory.csv").read_bytes()
    assert a == b


def test_emitted_override_round_trips_to_the_same_run(tmp_path):
    """Overridden emit + plain run == overridden run, byte for byte."""
    assert main(["run", "--builtin", "pull_up", "-o", str(tmp_path / "direct"),
                 "--set", "constants.total_mass=60",
                 "--set", "sim.duration=0.3", "--no-plots"]) == 0
    assert main(["emit-scenario", "pull_up", "-o", str(tmp_path),
                 "--set", "constants.total_mass=60",
                 "--set", "sim.duration=0.3"]) == 0
    emitted = tmp_path / "pull_up.scn.json"
    assert main(["run", str(emitted), "-o", str(tmp_path / "replay"),
                 "--no-plots"]) == 0
    direct = (tmp_path / "direct" / "trajectory.csv").read_bytes()
    replay = (tmp_path / "replay" / "trajectory.csv").read_bytes()
    assert direct == replay


def test_outdir_env_var_is_the_default(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("WIREDRIVE_OUT", str(tmp_path / "fromenv"))
    assert main(["emit-scenario", "kick"]) == 0
    path = capsys.readouterr().out.strip()
    assert path.startswith(str(tmp_path / "fromenv"))
    assert os.path.exists(path)


def test_multiple_scenarios_get_their_own_subdirectories(tmp_path):
    code = main(["run", "--builtin", "pull_up", "--builtin", "pull_up",
                 "-o", str(tmp_path), "--set", "sim.duration=0.1",
                 "--no-plots"])
    assert code == 0
    a = (tmp_path / "pull_up" / "trajectory.csv").read_bytes()
    b = (tmp_path / "pull_up-2" / "trajectory.csv").read_bytes()
    assert a == b


def test_infeasible_scenario_reports_structured_error(tmp_path, capsys):
    # a 600 kg body cannot hang from four 180 N wires
    code = main(["run", "--builtin", "pull_up", "-o", str(tmp_path),
                 "--set", "constants.total_mass=600", "--no-plots"])
    assert code == 1
    assert "InfeasibleTension" in capsys.readouterr().err
