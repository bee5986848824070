"""Command-line interface: output formats, determinism, exit codes."""

import json
import math
import subprocess

import pytest

from hcgibbs.chain import stationary_closed_form, transition_matrix
from hcgibbs.cli import main
from hcgibbs.model import ActivitySpec, graph_from_spec
from hcgibbs.two_loop import TwoLoopProblem, solve_unique

A_12 = 1.0169168190675275
Z_12 = 0.7710929641358364


@pytest.fixture
def spec2(tmp_path):
    path = tmp_path / "two.json"
    path.write_text(json.dumps({"k": 2, "loops": {"1": 1.0}, "tail_mass": 1.0}))
    return str(path)


@pytest.fixture
def spec3(tmp_path):
    path = tmp_path / "three.json"
    path.write_text(json.dumps({"k": 2, "loops": {"1": 9.0, "2": 9.0}, "tail_mass": 112.0}))
    return str(path)


@pytest.fixture
def specdiv(tmp_path):
    path = tmp_path / "div.json"
    path.write_text(json.dumps({"k": 2, "loops": {"1": 1.0}, "divergent": True}))
    return str(path)


def run_json(capsys, argv):
    rc = main(argv)
    out = capsys.readouterr().out
    assert rc == 0
    return json.loads(out)


def test_thresholds(capsys):
    data = run_json(capsys, ["thresholds", "--lambda", "9"])
    assert data["Lambda1"] == 126.0
    assert data["Lambda2"] == pytest.approx(144.81948217705747, rel=1e-12)
    assert data["lambda_star"] == pytest.approx(49.0 / 9.0, rel=1e-15)


def test_thresholds_bad_input(capsys):
    assert main(["thresholds", "--lambda", "-1"]) == 2
    assert "error:" in capsys.readouterr().err
    assert main(["thresholds", "--lambda", "zebra"]) == 2


def test_solve_two_loop(capsys, spec2):
    sols = run_json(capsys, ["solve", spec2])
    assert len(sols) == 1
    assert sols[0]["branch"] == "two-loop-g"
    assert sols[0]["A"] == pytest.approx(A_12, rel=1e-12)
    assert sols[0]["z"]["1"] == pytest.approx(Z_12, rel=1e-12)
    assert sols[0]["residual"] < 1e-10


def test_solve_three_loop(capsys, spec3):
    sols = run_json(capsys, ["solve", spec3])
    assert len(sols) == 5
    branches = {s["branch"] for s in sols}
    assert branches == {
        "symmetric",
        "asymmetric-A1",
        "asymmetric-A1-swapped",
        "asymmetric-A2",
        "asymmetric-A2-swapped",
    }
    assert all(s["residual"] < 1e-10 for s in sols)


def test_solve_divergent_exit_code(capsys, specdiv):
    assert main(["solve", specdiv]) == 3
    assert capsys.readouterr().err.startswith("no TIGM")


def test_solve_graph_mode_mismatch(capsys, spec2):
    assert main(["solve", spec2, "--graph", "three-loop"]) == 2


def test_solve_missing_file(capsys, tmp_path):
    assert main(["solve", str(tmp_path / "absent.json")]) == 2
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    assert main(["solve", str(broken)]) == 2


def test_classify(capsys):
    data = run_json(capsys, ["classify", "--lambda", "9", "--Lambda", "130"])
    assert data["case"] == "iv"
    assert data["count"] == 5
    assert data["Lambda1"] == 126.0


def test_classify_divergent(capsys):
    data = run_json(capsys, ["classify", "--divergent"])
    assert data["count"] == 0
    assert data["case"] == "divergent"


def test_classify_missing_flags(capsys):
    assert main(["classify", "--lambda", "9"]) == 2


def test_chain_json(capsys, spec3):
    data = run_json(capsys, ["chain", spec3])
    assert data["window"] == 2
    assert len(data["solutions"]) == 5
    for entry in data["solutions"]:
        assert entry["report"]["passed"] is True
        assert entry["report"]["max_residual"] < 1e-10
        assert entry["irreducible"] is True
        assert entry["matrix"]["states"] == [-2, -1, 0, 1, 2, "TAIL"]


def test_chain_csv_round_trip(capsys, spec2):
    rc = main(["chain", spec2, "--format", "csv", "--branch", "two-loop-g"])
    out = capsys.readouterr().out
    assert rc == 0
    matrix_text, dist_text = out.split("\n\n")
    lines = matrix_text.strip().split("\n")
    assert lines[0] == "-1,0,1,TAIL"
    parsed = [[float(tok) for tok in line.split(",")] for line in lines[1:]]

    spec = ActivitySpec(loop_activities={1: 1.0}, tail_mass=1.0)
    graph = graph_from_spec(spec)
    sol = solve_unique(TwoLoopProblem(1.0, 2.0))
    tm = transition_matrix(sol, spec, graph, 1)
    for i, row in enumerate(parsed):
        for j, value in enumerate(row):
            assert value == tm.matrix[i, j]

    dlines = dist_text.strip().split("\n")
    sd = stationary_closed_form(sol, spec, graph, 1)
    for j, tok in enumerate(dlines[1].split(",")):
        assert float(tok) == sd.probabilities[j]


def test_chain_unknown_branch(capsys, spec2):
    assert main(["chain", spec2, "--format", "csv", "--branch", "nope"]) == 2


def test_chain_window_too_small(capsys, spec3):
    assert main(["chain", spec3, "--window", "1"]) == 2


def test_sample_deterministic(capsys, spec2):
    argv = ["sample", spec2, "--depth", "4", "--trees", "3", "--seed", "7"]
    first = run_json(capsys, argv)
    second = run_json(capsys, argv)
    assert first == second
    assert len(first["samples"]) == 3
    assert first["admissible_fraction"] == 1.0
    assert abs(sum(first["marginal"].values()) - 1.0) < 1e-12
    assert all(isinstance(key, str) for key in first["marginal"])
    assert first["tv_to_stationary"] < 0.5


def test_sample_unknown_branch(capsys, spec2):
    assert main(["sample", spec2, "--depth", "2", "--seed", "1", "--branch", "nope"]) == 2


def test_sweep_grid(capsys):
    rc = main(["sweep", "--lambda-grid", "9", "--Lambda-grid", "100,130,200"])
    out = capsys.readouterr().out
    assert rc == 0
    lines = out.strip().split("\n")
    assert lines[0] == "lambda,Lambda,count_closed_form,count_oracle,agree"
    rows = [line.split(",") for line in lines[1:]]
    assert [(r[2], r[3], r[4]) for r in rows] == [
        ("3", "3", "true"),
        ("5", "5", "true"),
        ("1", "1", "true"),
    ]


def test_sweep_skips_inconsistent_cells(capsys):
    rc = main(["sweep", "--lambda-grid", "9", "--Lambda-grid", "10"])
    captured = capsys.readouterr()
    assert rc == 0
    assert captured.out.strip() == "lambda,Lambda,count_closed_form,count_oracle,agree"
    assert "skipping" in captured.err


def test_sweep_empty_grid(capsys):
    rc = main(["sweep", "--lambda-grid", "", "--Lambda-grid", "5"])
    captured = capsys.readouterr()
    assert rc == 0
    assert captured.out.strip() == "lambda,Lambda,count_closed_form,count_oracle,agree"
    assert captured.err == ""


def test_sweep_missing_arguments(capsys):
    assert main(["sweep", "--lambda-grid", "9"]) == 2


def test_sweep_curve_identity(capsys):
    x = 2.5
    rc = main(
        ["sweep", "--emit-curves", "f,g", "--x", str(x), "--Lambda", "6", "--points", "50"]
    )
    out = capsys.readouterr().out
    assert rc == 0
    lines = out.strip().split("\n")
    assert lines[0] == "lambda,f,g"
    assert len(lines) == 51
    for line in lines[1:]:
        lam, f, g = (float(tok) for tok in line.split(","))
        gap = 2.0 * x**3 * math.sqrt(x * x - 4.0 * lam)
        assert f - g == pytest.approx(gap, abs=1e-10)
    assert float(lines[-1].split(",")[0]) == pytest.approx(x * x / 4.0, rel=1e-15)


def test_sweep_curve_pair_names(capsys):
    rc = main(
        ["sweep", "--emit-curves", "h,delta", "--x", "2.0", "--Lambda", "10", "--points", "10"]
    )
    out = capsys.readouterr().out
    assert rc == 0
    assert out.startswith("lambda,h,delta")
    assert main(["sweep", "--emit-curves", "f,h", "--x", "2.0", "--Lambda", "10"]) == 2
    assert main(["sweep", "--emit-curves", "f,g", "--Lambda", "10"]) == 2


def test_out_flag_writes_file(tmp_path, capsys):
    target = tmp_path / "thr.json"
    rc = main(["thresholds", "--lambda", "4", "--out", str(target)])
    assert rc == 0
    assert capsys.readouterr().out == ""
    data = json.loads(target.read_text())
    assert data["Lambda1"] == 24.0


def test_console_script():
    proc = subprocess.run(
        ["hcgibbs", "thresholds", "--lambda", "4"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    data = json.loads(proc.stdout)
    assert data["Lambda1"] == 24.0
    assert data["Lambda2"] == pytest.approx(25.63659945443753, rel=1e-12)
