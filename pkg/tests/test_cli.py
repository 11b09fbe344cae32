import json
import subprocess
import sys
from pathlib import Path

import pytest

from bpmsr import cli
from bpmsr.config import dump_scenario
from bpmsr.graph_core import Digraph, RoleAssignment, StaticSchedule
from bpmsr.engine import Scenario
from bpmsr.protocols import ConstantSignal

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
ALT = str(SCENARIOS / "alternating.scenario")
THREE = str(SCENARIOS / "three_periodic_zero.scenario")


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write(tmp_path, s, name="s.scenario"):
    p = tmp_path / name
    p.write_text(dump_scenario(s))
    return str(p)


def test_run_writes_outputs(tmp_path, capsys):
    code, out, _ = run(capsys, "run", ALT, "--output-dir", str(tmp_path), "--plots")
    assert code == 0
    res = json.loads(out)
    summary = json.loads(Path(res["summary"]).read_text())
    assert summary["convergence"]["converged"] == [6, 7, 8]
    assert summary["bounds"]["lower"] == [6, 7, 8]
    assert summary["contraction"] is True
    assert Path(res["trajectory"]).exists()
    assert (Path(res["plots"]) / "manifest.json").exists()


def test_env_var_output_root(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ENV, str(tmp_path / "env"))
    code, out, _ = run(capsys, "run", ALT, "--horizon", "20")
    assert code == 0
    assert json.loads(out)["summary"].startswith(str(tmp_path / "env"))


def test_protocol_override(tmp_path, capsys):
    code, out, _ = run(capsys, "run", ALT, "--output-dir", str(tmp_path), "--protocol", "W-MSR")
    summary = json.loads(Path(json.loads(out)["summary"]).read_text())
    assert summary["protocol"] == "W-MSR"
    assert summary["convergence"]["converged"] == []


def test_set_override_and_bad_set(tmp_path, capsys):
    code, out, _ = run(capsys, "run", ALT, "--output-dir", str(tmp_path),
                       "--set", "scenario.horizon=15")
    assert code == 0
    assert json.loads(Path(json.loads(out)["summary"]).read_text())["horizon"] == 15
    code, _, err = run(capsys, "run", ALT, "--set", "horizon15")
    assert code == 1 and "section.key" in err


def test_parse_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.scenario"
    bad.write_text("[scenario]\nnodes = x\n")
    code, _, err = run(capsys, "run", str(bad))
    assert code == 1 and "error" in err


def test_usage_error_exit_code(capsys):
    assert run(capsys, "frobnicate")[0] == 1
    assert run(capsys, "run", ALT, ALT)[0] == 1   # several configs need --batch


def test_invalid_scenario_exit_code(tmp_path, capsys):
    s = Scenario(StaticSchedule(Digraph.complete(4)), RoleAssignment.from_leaders(4, {0}),
                 1, ConstantSignal(0.0), horizon=0)
    code, _, err = run(capsys, "run", write(tmp_path, s))
    assert code == 2 and "horizon" in err


def test_runtime_violation_exit_code(tmp_path, capsys):
    # F=0 while a follower listens to an adversary: the safety check trips
    g = Digraph.from_edges(3, [(0, 2), (1, 2)])
    from bpmsr.protocols import ConstantOutlier
    s = Scenario(StaticSchedule(g), RoleAssignment.from_leaders(3, {1}, {0}), 0,
                 ConstantSignal(1.0), value_strategy=ConstantOutlier(1e6), horizon=5)
    with pytest.warns(UserWarning):
        code, _, err = run(capsys, "run", write(tmp_path, s), "--check-safety",
                           "--output-dir", str(tmp_path))
    assert code == 3 and "left" in err


def test_batch(tmp_path, capsys):
    code, out, _ = run(capsys, "run", ALT, THREE, "--batch", "-j", "2", "--horizon", "30",
                       "--output-dir", str(tmp_path))
    assert code == 0
    res = json.loads(out)
    assert set(res) == {ALT, THREE}
    assert "alternating" in res[ALT]["summary"] and "three_periodic_zero" in res[THREE]["summary"]


def test_compare(tmp_path, capsys):
    code, out, _ = run(capsys, "compare", ALT, "--output-dir", str(tmp_path))
    assert code == 0
    assert json.loads(out) == {"W-MSR": [], "SW-MSR(2)": [], "BP-MSR": [6, 7, 8]}
    assert (tmp_path / "alternating" / "compare" / "comparison.json").exists()


def test_check_robustness(capsys):
    code, out, _ = run(capsys, "check-robustness", ALT)
    assert code == 0
    rep = json.loads(out)
    g1 = rep["graphs"]["0"]
    assert g1["robust"] is False and g1["witness"] == [0] and g1["robust_bp"] is False
    assert g1["activated_normal_only"] == [6, 7]
    assert rep["graphs"]["1"]["activated_with_adversaries"] == [8]
    code, out, _ = run(capsys, "check-robustness", ALT, "--r", "1", "--offset", "1")
    assert json.loads(out)["graphs"]["1"]["robust"] is True
    assert "robust_bp" not in json.loads(out)["graphs"]["1"]


def test_check_robustness_complete_and_isolated(tmp_path, capsys):
    s = Scenario(StaticSchedule(Digraph.complete(6)), RoleAssignment.from_leaders(6, {0, 1, 2}),
                 1, ConstantSignal(0.0))
    out = json.loads(run(capsys, "check-robustness", write(tmp_path, s))[1])
    assert out["graphs"]["0"]["robust"] is True and out["graphs"]["0"]["robust_bp"] is True
    iso = Scenario(StaticSchedule(Digraph.from_edges(4, [(0, 1), (0, 2)])),
                   RoleAssignment.from_leaders(4, {0}), 0, ConstantSignal(0.0))
    out = json.loads(run(capsys, "check-robustness", write(tmp_path, iso, "iso.scenario"))[1])
    assert out["graphs"]["0"]["witness"] == [3]


def test_check_robustness_bad_node(capsys):
    assert run(capsys, "check-robustness", ALT, "--set-nodes", "1 99")[0] == 1


def test_bounds(capsys, tmp_path):
    out = json.loads(run(capsys, "bounds", THREE)[1])
    assert out["lower"] == [6, 7, 8] and out["upper"] == [4, 5, 6, 7, 8] and out["strict"]
    out = json.loads(run(capsys, "bounds", ALT)[1])
    assert out["lower"] == out["upper"] and not out["strict"]
    chain = Scenario(StaticSchedule(Digraph.from_edges(4, [(0, 1), (1, 2), (2, 3)])),
                     RoleAssignment.from_leaders(4, {0}), 1, ConstantSignal(0.0))
    assert json.loads(run(capsys, "bounds", write(tmp_path, chain))[1])["lower"] == []


def test_bounds_timeline_unsupported(tmp_path, capsys):
    p = tmp_path / "tl.scenario"
    p.write_text(Path(ALT).read_text().replace("periodic = true", "periodic = false"))
    code, _, err = run(capsys, "bounds", str(p))
    assert code == 2 and "periodic" in err


def test_analyze_existing_trajectory(tmp_path, capsys):
    res = json.loads(run(capsys, "run", ALT, "--output-dir", str(tmp_path))[1])
    code, out, _ = run(capsys, "analyze", ALT, "--trajectory", res["trajectory"],
                       "--summary", str(tmp_path / "again.json"))
    assert code == 0
    assert json.loads(out) == json.loads(Path(res["summary"]).read_text())
    assert run(capsys, "analyze", ALT, "--trajectory", res["trajectory"],
               "--horizon", "10")[0] == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "bpmsr.cli", "bounds", THREE],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["strict"] is True
