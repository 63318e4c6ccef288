import json
import math
import subprocess
import sys

import numpy as np
import pytest

from conftest import DATA
from ctmdp.cli import main
from ctmdp.model import m3_model, save_model

M3 = str(DATA / "m3.json")


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None), out


@pytest.fixture
def pi_file(tmp_path):
    path = tmp_path / "pi.json"
    path.write_text(json.dumps({"policy": {"s0": {"a0": 1 / 3, "a1": 2 / 3}, "s1": {"a1": 1.0},
                                           "s2": {"a0": 1.0}}}))
    return str(path)


def test_solve_m3(capsys):
    code, doc, _ = run(["solve", M3], capsys)
    assert code == 0 and doc["status"] == "optimal"
    assert abs(doc["value"] - 0.4) <= 1e-9
    assert abs(doc["sigma"]["s0"]["a0"] - 0.2) <= 1e-12
    assert abs(doc["pi"]["s0"]["a0"] - 1 / 3) <= 1e-12
    assert abs(doc["constraint_usage"][0] - 0.4) <= 1e-12
    assert abs(doc["ct_evaluation"]["aggregate"][0] - 0.4) <= 1e-9


def test_solve_infeasible_exit_1(tmp_path, capsys):
    path = tmp_path / "m.json"
    m = m3_model()
    costs = np.array(m.costs)
    costs[1, 1, 1] = 1.0        # every route out of s1 now uses d_1
    save_model(m.replace(costs=costs, bounds=np.array([0.1]), initial=np.array([0.0, 1.0, 0.0])), path)
    code, doc, _ = run(["solve", str(path)], capsys)
    assert code == 1 and doc["status"] != "optimal" and doc["value"] == "inf"


def test_validate(tmp_path, capsys):
    code, doc, _ = run(["validate", M3], capsys)
    assert code == 0 and doc["valid"]
    broken = json.loads((DATA / "m3.json").read_text())
    broken["rates"]["s0/a0"]["s1"] = -1.0
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(broken))
    code, doc, _ = run(["validate", str(path)], capsys)
    assert code == 1 and not doc["valid"] and doc["problems"]


def test_unparseable_model_exit_1(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{")
    code, doc, _ = run(["classify", str(path)], capsys)
    assert code == 1 and "line 1" in doc["error"]


def test_usage_errors(capsys):
    assert main(["solve"]) == 2
    assert main(["frobnicate", M3]) == 2
    assert main(["simulate", M3, "--policy", "p.json", "--n-traj", "-3"]) == 2
    assert main(["classify", "/nonexistent/model.json"]) == 2
    assert main(["--help"]) == 0


def test_classify_and_reduce(capsys):
    code, doc, _ = run(["classify", M3], capsys)
    assert code == 0 and doc["states"]["s1"]["partition"] == "S1"
    code, doc, _ = run(["reduce", M3], capsys)
    assert doc["reduced_costs"][0]["s1/a0"] == "inf"
    code, doc, _ = run(["reduce", M3, "--alpha", "1"], capsys)
    assert doc["kernel"]["s0/a0"]["s1"] == 0.5


def test_evaluate(pi_file, capsys):
    code, doc, _ = run(["evaluate", M3, "--policy", pi_file], capsys)
    assert code == 0 and abs(doc["aggregate"][1] - 0.4) < 1e-12 and doc["feasible"] == [True]


def test_simulate_byte_identical(pi_file, capsys):
    argv = ["simulate", M3, "--policy", pi_file, "--n-traj", "20000", "--seed", "4", "--alpha", "1"]
    _, doc, a = run(argv, capsys)
    _, _, b = run(argv + ["--workers", "3"], capsys)
    assert a == b
    assert abs(doc["costs"]["mean"][0] - 0.4) <= 4 * doc["costs"]["stderr"][0]
    assert doc["occupancy_bound_holds"]


def test_demo_ex1(capsys):
    code, doc, out = run(["demo-ex1", "--n-traj", "100000", "--seed", "7"], capsys)
    assert code == 0 and doc["gap_holds"] and doc["dtmdp_value"] == 1.0
    assert abs(doc["ctmdp_cost_estimate"] - (1 - math.exp(-1))) < 0.01
    _, _, again = run(["demo-ex1", "--n-traj", "100000", "--seed", "7"], capsys)
    assert out == again


def test_verify_model(capsys):
    code, doc, _ = run(["verify", M3], capsys)
    assert code == 0 and all(r["passed"] for r in doc)
    assert {r["name"] for r in doc} >= {"discounted_balance", "lift_roundtrip", "structure"}


def test_verify_small_corpus(capsys):
    code, doc, _ = run(["verify", "--corpus-size", "5"], capsys)
    assert code == 0 and any(r["name"] == "example_reduction_gap" for r in doc)


def test_output_file(tmp_path, capsys):
    out = tmp_path / "solve.json"
    assert main(["solve", M3, "-o", str(out)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(out.read_text())["status"] == "optimal"


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "ctmdp.cli", "classify", M3], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["w_iterations"] == 1
