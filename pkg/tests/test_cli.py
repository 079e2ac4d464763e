import json
import math
import subprocess
import sys

import numpy as np
import pytest

from polystab import acceptance
from polystab import cli
from polystab import spectral as sp

from conftest import BOWTIE, DART, RECTANGLE, hexagon


@pytest.fixture
def files(tmp_path):
    def write(name, pts):
        path = tmp_path / name
        path.write_text(json.dumps({"vertices": [list(map(float, p)) for p in pts]}))
        return str(path)

    csv = tmp_path / "rect.csv"
    csv.write_text("x,y\n" + "\n".join(f"{x},{y}" for x, y in RECTANGLE) + "\n")
    return {
        "rect": str(csv),
        "hex": write("hex.json", hexagon(1.0)),
        "dart": write("dart.json", DART),
        "bowtie": write("bowtie.json", BOWTIE),
        "dir": tmp_path,
    }


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_rectangle(files, capsys):
    code, out, _ = run(["analyze", files["rect"], "--tau", "--restarts", "2"], capsys)
    assert code == 0
    rep = json.loads(out)
    m = rep["metrics"]
    assert m["delta"] == pytest.approx(4) and m["sigma_s2"] == pytest.approx(0.25)
    assert abs(m["sigma_r2"]) < 1e-12 and rep["tau"] == 0
    chk = rep["inequality_check"]
    assert chk["satisfied"] and chk["lhs"] <= chk["rhs"]
    assert rep["provenance"]["seed"] == 0


def test_analyze_hexagon_with_fixed_constant(files, tmp_path, capsys):
    out_file = tmp_path / "rep.json"
    code, out, _ = run(["analyze", files["hex"], "--constant", "1.0", "--out", str(out_file)], capsys)
    assert code == 0 and out == ""
    m = json.loads(out_file.read_text())["metrics"]
    for key in ("delta", "sigma_s2", "sigma_r2"):
        assert abs(m[key]) <= 1e-12


def test_analyze_violation_exit_code(files, capsys):
    # a zero constant cannot cover the rectangle's positive side variance
    code, out, _ = run(["analyze", files["rect"], "--constant", "0"], capsys)
    assert code == 2 and not json.loads(out)["inequality_check"]["satisfied"]


def test_analyze_bowtie(files, capsys):
    code, _, err = run(["analyze", files["bowtie"], "--tau"], capsys)
    assert code == 1 and "SelfIntersecting" in err


def test_analyze_parse_error(files, capsys):
    bad = files["dir"] / "bad.json"
    bad.write_text("{oops")
    code, _, err = run(["analyze", str(bad)], capsys)
    assert code == 1 and "ParseError" in err


def test_convexify_dart(files, capsys):
    trace = files["dir"] / "t.json"
    code, out, _ = run(["convexify", files["dart"], "--trace", str(trace)], capsys)
    assert code == 0 and "steps=1" in out and "tau=4.0" in out
    doc = json.loads(trace.read_text())
    assert len(doc["steps"]) == 1 and doc["tau"] == pytest.approx(4)
    assert doc["steps"][0]["vertices_after"][2] == pytest.approx([50 / 13, 29 / 13], abs=1e-12)


def test_convexify_convex_file(files, capsys):
    code, out, _ = run(["convexify", files["hex"], "--policy", "largest_pocket"], capsys)
    assert code == 0 and "steps=0" in out


def test_convexify_random_corpus(capsys):
    code, out, _ = run(["convexify", "--random", "n=10", "count=200", "seed=3"], capsys)
    doc = json.loads(out)
    assert code == 0
    assert doc["terminated"] == 200 and all(r["convex"] for r in doc["polygons"])


def test_convexify_bad_random_options(capsys):
    code, _, _ = run(["convexify", "--random", "n=2"], capsys)
    assert code == 1


def test_spectral_square(capsys):
    code, out, _ = run(["spectral", "--n", "4", "--samples", "500"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["passed"]
    lam = doc["results"][0]["lambda"]
    assert lam == pytest.approx([-4, 0, 4, 0], abs=1e-12)


def test_spectral_range(capsys, tmp_path):
    csv = tmp_path / "eig.csv"
    code, out, _ = run(["spectral", "--n-range", "3:32", "--csv", str(csv)], capsys)
    assert code == 0 and len(json.loads(out)["results"]) == 30
    assert csv.read_text().splitlines()[0] == "n,k,lambda,mu"


def test_spectral_unreachable_tolerance(capsys):
    code, out, err = run(["spectral", "--n", "4", "--tol", "1e-20"], capsys)
    assert code == 2 and "IdentityViolated" in err
    assert json.loads(out)["passed"] is False


@pytest.mark.parametrize("argv", [["spectral"], ["spectral", "--n", "2"], ["spectral", "--n-range", "x"]])
def test_spectral_usage_errors(argv, capsys):
    assert run(argv, capsys)[0] == 1


def test_estimate_constant_reproducible(capsys, tmp_path):
    code, out1, _ = run(["estimate-constant", "--n", "4", "--restarts", "16", "--seed", "42"], capsys)
    _, out2, _ = run(["estimate-constant", "--n", "4", "--restarts", "16", "--seed", "42"], capsys)
    assert code == 0 and out1 == out2
    doc = json.loads(out1)
    assert doc["estimate"]["sup_ratio"] >= 1 and doc["estimate"]["empirical"]
    assert doc["constants"]["C_theorem"] > 0


def test_estimate_constant_sweep_csv(capsys, tmp_path):
    csv = tmp_path / "sweep.csv"
    code, _, _ = run(["estimate-constant", "--n-range", "3:10", "--restarts", "2", "--csv", str(csv)], capsys)
    rows = csv.read_text().splitlines()
    assert code == 0 and len(rows) == 1 + 8
    assert [int(r.split(",")[0]) for r in rows[1:]] == list(range(3, 11))


def test_estimate_constant_zero_restarts(capsys):
    code, _, err = run(["estimate-constant", "--n", "4", "--restarts", "0"], capsys)
    assert code == 1 and "usage" in err


def test_unknown_command_is_usage_error(capsys):
    assert run(["frobnicate"], capsys)[0] == 1


def test_verify_detects_corrupted_install(monkeypatch, capsys):
    real = sp.matrix_H
    monkeypatch.setattr(sp, "matrix_H", lambda n: real(n) + 1e-6)
    monkeypatch.setattr(acceptance, "CRITERIA", (acceptance.criterion_identities,))
    code, out, _ = run(["verify", "--quick"], capsys)
    assert code == 2 and "[FAIL]" in out


def test_verify_quick_passes(capsys):
    code, out, _ = run(["verify", "--quick"], capsys)
    assert code == 0, out
    assert out.count("[PASS]") == 10


def test_module_entry_point(files):
    proc = subprocess.run(
        [sys.executable, "-m", "polystab", "convexify", files["dart"]],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0 and "steps=1" in proc.stdout
