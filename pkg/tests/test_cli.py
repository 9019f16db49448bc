from __future__ import annotations

import json
import math

import pytest

from blochlip.cli import main


def run(tmp_path, *argv):
    out = tmp_path / "report.json"
    code = main([*argv, "--out", str(out)])
    report = json.loads(out.read_text()) if out.exists() else None
    return code, report


@pytest.fixture
def quarter(tmp_path):
    path = tmp_path / "quarter.txt"
    rows = [f"{math.cos(t):.17g} {math.sin(t):.17g}"
            for t in [k * math.pi / 4000 for k in range(2001)]]
    path.write_text("\n".join(rows) + "\n")
    return path


def test_length_quarter_circle(tmp_path, quarter):
    code, report = run(tmp_path, "length", str(quarter))
    assert code == 0
    assert report["schema"] == "blochlip.report/1"
    assert report["result"]["curve_length"] == pytest.approx(math.pi / 2, abs=1e-4)
    assert report["result"]["weighted_length"] == pytest.approx(math.pi / 2, abs=1e-4)


def test_length_hyperbolic_segment(tmp_path):
    path = tmp_path / "seg.txt"
    path.write_text("0 0\n0.5 0\n")
    code, report = run(tmp_path, "length", str(path), "--weight", "hyperbolic")
    assert code == 0
    assert report["result"]["weighted_length"] == pytest.approx(math.atanh(0.5), abs=1e-5)


@pytest.mark.parametrize("content", ["", "# only a comment\n", "0 0\n1\n", "0 zero\n1 1\n",
                                     "0.5 0.5\n"])
def test_length_rejects_malformed_vertex_files(tmp_path, content):
    path = tmp_path / "bad.txt"
    path.write_text(content)
    assert run(tmp_path, "length", str(path))[0] == 2


def test_length_missing_file(tmp_path):
    assert run(tmp_path, "length", str(tmp_path / "missing.txt"))[0] == 2


def test_length_non_convergence_exit_code(tmp_path):
    path = tmp_path / "edge.txt"
    path.write_text("0 0\n0.999999 0\n")
    code, _ = run(tmp_path, "length", str(path), "--weight", "hyperbolic", "--tol", "1e-14")
    assert code == 3


def test_distance_hyperbolic(tmp_path):
    witness = tmp_path / "witness.txt"
    code, report = run(tmp_path, "distance", "0,0", "0.5,0", "--witness", str(witness))
    assert code == 0
    assert report["result"]["relative_deviation"] <= 0.02
    assert report["result"]["closed_form"] == pytest.approx(math.atanh(0.5), rel=1e-11)
    lines = witness.read_text().split("\n")
    assert lines[0].split() == ["0", "0"]


def test_distance_equal_points(tmp_path):
    code, report = run(tmp_path, "distance", "0.1,0.2", "0.1,0.2")
    assert code == 0
    assert report["result"]["distance"] == 0.0


def test_distance_spherical(tmp_path):
    code, report = run(tmp_path, "distance", "0,0", "1,0", "--weight", "spherical")
    assert code == 0
    assert report["result"]["distance"] == pytest.approx(math.pi / 4, rel=0.02)


@pytest.mark.parametrize("argv", [["0,0", "0.99,0"], ["0,0", "0.1,0,0.2"], ["0,x", "0,0"]])
def test_distance_validation(tmp_path, argv):
    assert run(tmp_path, "distance", *argv)[0] == 2


def test_verify_identity(tmp_path):
    csv = tmp_path / "q.csv"
    code, report = run(tmp_path, "verify", "--function", "identity", "--grid", "500",
                       "--pairs", "2000", "--csv", str(csv))
    assert code == 0
    r = report["result"]
    assert r["gap"] < 1e-6
    assert r["bloch"]["value"] == 1.0
    assert r["admissibility"]["passed"]
    rows = csv.read_text().strip().split("\n")
    assert rows[0] == "x0,x1,y0,y1,quotient"
    assert len(rows) == 2001


def test_verify_exp_cayley_normal(tmp_path):
    code, report = run(tmp_path, "verify", "--function", "exp_cayley", "--admissible", "normal",
                       "--radius", "0.99", "--grid", "2000", "--pairs", "10000")
    assert code == 0
    r = report["result"]
    assert math.isfinite(r["bloch"]["value"]) and math.isfinite(r["lipschitz"]["value"])
    assert r["gap"] < 0.1


def test_verify_inline_polynomial(tmp_path):
    code, report = run(tmp_path, "verify", "--function", "poly:0,1,0.5", "--admissible",
                       "minmax", "--grid", "500", "--pairs", "2000")
    assert code == 0
    assert report["result"]["bloch"]["value"] == pytest.approx(32 / 27, rel=1e-6)


def test_verify_negative_control_exits_four(tmp_path):
    code, report = run(tmp_path, "verify", "--scale", "2", "--grid", "200", "--pairs", "200")
    assert code == 4
    assert not report["result"]["admissibility"]["passed"]
    assert len(report["result"]["admissibility"]["violating_pair"]) == 2


def test_admissible_check(tmp_path):
    code, report = run(tmp_path, "admissible-check", "--admissible", "jocic")
    assert code == 0
    assert all(report["result"]["admissibility"]["conditions"].values())
    assert run(tmp_path, "admissible-check", "--scale", "2")[0] == 4


@pytest.mark.parametrize("argv", [["--function", "nope"], ["--function", "poly:1,x"],
                                  ["--radius", "1.5"], ["--function", "field3",
                                                        "--admissible", "normal"]])
def test_verify_validation(tmp_path, argv):
    assert run(tmp_path, "verify", *argv)[0] == 2


def test_classify(tmp_path):
    code, report = run(tmp_path, "classify", "--function", "exp_cayley", "--grid", "500")
    assert code == 0
    r = report["result"]
    assert r["verdict"] == "normal"
    assert r["bloch"]["verdict"] == "unbounded"
    assert len(r["bloch"]["radii"]) == 8


def test_classify_constant(tmp_path):
    code, report = run(tmp_path, "classify", "--function", "constant", "--grid", "200")
    assert code == 0
    assert report["result"]["verdict"] == "both"
    assert report["result"]["bloch"]["values"] == [0.0] * 8


def test_classify_unknown_entry(tmp_path):
    assert run(tmp_path, "classify", "--function", "nope")[0] == 2


def test_bad_budget(tmp_path):
    assert run(tmp_path, "verify", "--pairs", "0")[0] == 2


def test_numbers_have_twelve_significant_digits(tmp_path):
    code, report = run(tmp_path, "distance", "0,0", "0.3,0.4")
    text = repr(report["result"]["closed_form"])
    assert len(text.replace("0.", "", 1).lstrip("0")) <= 12


def test_reports_are_deterministic(tmp_path, monkeypatch):
    outputs = []
    for threads in ("1", "8", "1"):
        monkeypatch.setenv("BLOCHLIP_THREADS", threads)
        out = tmp_path / f"r{len(outputs)}.json"
        assert main(["verify", "--function", "log1m", "--pairs", "9000", "--grid", "5000",
                     "--seed", "7", "--out", str(out)]) == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]
