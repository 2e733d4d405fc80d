import csv
import io
import json
import subprocess
import sys

import pytest

from infharm.cli import SCHEMA_VERSION, main


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_single_entry(capsys):
    code, out, _ = run(["check", "--entry", "clifford_torus"], capsys)
    assert code == 0
    report = json.loads(out)
    assert report["schema_version"] == SCHEMA_VERSION
    (entry,) = report["entries"]
    assert entry["pass"]
    assert entry["flags"]["infinity_harmonic"] is True
    assert entry["flags"]["hwc"] is False


def test_check_unknown_entry(capsys):
    code, out, err = run(["check", "--entry", "bogus"], capsys)
    assert code == 2
    assert "bogus" in err and out == ""


def test_check_reports_failure_with_exit_one(capsys):
    # a tolerance far below roundoff makes infinity harmonic checks fail
    code, out, _ = run(["check", "--entry", "aronsson_function", "--tol", "1e-300"], capsys)
    assert code == 1
    assert json.loads(out)["pass"] is False


def test_check_is_deterministic(capsys):
    args = ["check", "--entry", "aronsson_function", "--entry", "linear_diag12", "--seed", "7"]
    _, first, _ = run(args, capsys)
    _, second, _ = run(args, capsys)
    assert first == second


def test_check_formats(capsys, tmp_path):
    code, out, _ = run(["check", "--entry", "affine_map", "--format", "csv"], capsys)
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0][0] == "id" and rows[1][0] == "affine_map"
    code, out, _ = run(["check", "--entry", "affine_map", "--format", "human"], capsys)
    assert "PASS" in out
    target = tmp_path / "report.json"
    code, out, _ = run(["check", "--entry", "affine_map", "--out", str(target)], capsys)
    assert out == "" and json.loads(target.read_text())["pass"]


def test_negative_entry_witness_in_report(capsys):
    code, out, _ = run(["check", "--entry", "doubly_warped_distance"], capsys)
    assert code == 0
    (entry,) = json.loads(out)["entries"]
    assert entry["witness"]["residual"] > 1e-3


@pytest.fixture
def projection_file(tmp_path):
    p = tmp_path / "proj.yaml"
    p.write_text("source: {dim: 3}\ntarget: {dim: 2}\nmap: [x1, x2]\n")
    return p


def test_classify_projection(projection_file, capsys):
    code, out, _ = run(["classify", str(projection_file)], capsys)
    assert code == 0
    report = json.loads(out)
    assert "infinity_harmonic_morphism" in report["verdict"]
    assert set(report["worst_residuals"]) == {"infinity_harmonic", "verticality", "conformality", "homothety"}


def test_classify_diag12(tmp_path, capsys):
    p = tmp_path / "diag.yaml"
    p.write_text("source: {dim: 2}\ntarget: {dim: 2}\nmap: [x1, 2*x2]\n")
    code, out, _ = run(["classify", str(p), "--format", "human"], capsys)
    assert code == 0
    assert "conformality" in out and "fails" in out


def test_classify_parse_error(tmp_path, capsys):
    p = tmp_path / "bad.yaml"
    p.write_text('source: {dim: 2}\ntarget: {dim: 1}\nmap:\n  - "x1 +* x2"\n')
    code, _, err = run(["classify", str(p)], capsys)
    assert code == 2
    assert "line 4, column 10" in err


def test_classify_singular_point(tmp_path, capsys):
    p = tmp_path / "sing.yaml"
    p.write_text("source: {dim: 2}\ntarget: {dim: 1}\nmap: ['x1/x2']\nregion: {counts: 3}\n")
    code, _, err = run(["classify", str(p)], capsys)
    assert code == 2
    assert "division by zero" in err and "(-1, 0)" in err


def test_reduce_kink_writes_csv(tmp_path, capsys):
    target = tmp_path / "kink.csv"
    code, out, _ = run(["reduce", "kink", "--k", "1", "--A", "0", "--out", str(target)], capsys)
    assert code == 0
    report = json.loads(out)
    assert report["verification"]["max_inf_laplacian"] < 1e-6
    assert target.read_text().startswith("parameter,value,derivative,invariant_residual\n")


def test_reduce_wrong_regime(capsys):
    code, _, err = run(["reduce", "pendulum", "--k", "1", "--C", "0.5"], capsys)
    assert code == 2
    assert "kink" in err and "constant" in err


def test_reduce_ball_reports_turning_point(capsys):
    code, out, _ = run(["reduce", "ball", "--n", "2", "--C", "2"], capsys)
    assert code == 0
    report = json.loads(out)
    assert report["events"] and report["verification"]["max_energy_error"] < 1e-6


def test_reduce_ball_infeasible(capsys):
    code, _, err = run(["reduce", "ball", "--n", "2", "--C", "0.5"], capsys)
    assert code == 2 and "equator" in err


def test_conformal_sphere(capsys):
    code, out, _ = run(["conformal", "--model", "sphere", "--u", "atan(x1/x2)", "--seed", "1"], capsys)
    report = json.loads(out)
    assert code == 0 and report["max_residual"] < 1e-10


def test_conformal_bad_expression(capsys):
    code, _, err = run(["conformal", "--u", "x1 +", "--dim", "2"], capsys)
    assert code == 2 and "column" in err


def test_catalog_listing(capsys):
    code, out, _ = run(["catalog"], capsys)
    ids = [e["id"] for e in json.loads(out)["entries"]]
    assert code == 0 and ids == sorted(ids) and "sol_projection" in ids


@pytest.mark.parametrize("args", [["check", "--tol", "0"], ["check", "--tol", "x"], ["nope"], ["reduce", "spiral"]])
def test_usage_errors_exit_two(args, capsys):
    assert main(args) == 2


def test_module_entry_point(projection_file):
    proc = subprocess.run([sys.executable, "-m", "infharm", "classify", str(projection_file), "--format", "human"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "infinity_harmonic_morphism" in proc.stdout
