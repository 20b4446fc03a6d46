import csv
import json
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from volprod.cli import CSV_COLUMNS, REPORT_VERSION, load_manifest, main
from volprod.errors import InputError


def _manifest(tmp_path, checks, **extra):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"checks": checks, **extra}))
    return path


CUBE = {"kind": "zonotope", "generators": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]}


def test_run_manifest_santalo_row(tmp_path, capsys):
    (tmp_path / "cube.json").write_text(json.dumps(CUBE))
    m = _manifest(tmp_path, [{"check": "santalo", "body": "cube.json", "seed": 0}])
    out = tmp_path / "r.json"
    assert main(["run", "--manifest", str(m), "--out", str(out)]) == 0
    rows = json.loads(out.read_text())["rows"]
    assert rows[0]["name"] == "santalo-upper"
    assert rows[0]["lhs"] == pytest.approx(32 / 3) and rows[0]["rhs"] == pytest.approx((4 * 3.141592653589793 / 3) ** 2)
    assert rows[0]["pass"] is True
    assert (tmp_path / "r.meta.json").exists()


def test_json_report_is_byte_identical_across_jobs(tmp_path):
    checks = [{"check": "santalo", "body": "hexagon", "params": {"method": "mc", "samples": 20000}, "seed": 1},
              {"check": "lemma34", "params": {"f": "quad"}, "seed": 0},
              {"check": "lemma35", "body": "double_cone", "params": {"x": [0, 0, 1]}, "seed": 2},
              {"check": "bipolar", "body": "octagon", "seed": 3}]
    m = _manifest(tmp_path, checks)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["run", "--manifest", str(m), "--out", str(a)]) == 0
    assert main(["run", "--manifest", str(m), "--out", str(b), "--jobs", "4"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_csv_report(tmp_path):
    m = _manifest(tmp_path, [{"check": "lemma34", "params": {"f": "tent"}, "seed": 5}])
    out = tmp_path / "r.csv"
    assert main(["run", "--manifest", str(m), "--out", str(out), "--format", "csv"]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == [REPORT_VERSION]
    assert tuple(rows[1]) == CSV_COLUMNS
    assert rows[2][0] == "lemma34" and rows[2][5] == "pass"


def test_verify_batch_infers_csv(tmp_path):
    m = _manifest(tmp_path, [{"check": "eta", "params": {"dim": 2}, "seed": 0}])
    out = tmp_path / "batch.csv"
    assert main(["verify", "batch", "--manifest", str(m), "--out", str(out)]) == 0
    assert out.read_text().startswith(REPORT_VERSION)


def test_empty_manifest_warns(tmp_path, caplog):
    m = _manifest(tmp_path, [])
    out = tmp_path / "r.json"
    assert main(["run", "--manifest", str(m), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["rows"] == []
    assert "no checks" in caplog.text


def test_missing_body_file_is_status_2_and_no_report(tmp_path, capsys):
    m = _manifest(tmp_path, [{"check": "santalo", "body": "nope.json", "seed": 0}])
    out = tmp_path / "r.json"
    assert main(["run", "--manifest", str(m), "--out", str(out)]) == 2
    err = capsys.readouterr().err
    assert "nope.json" in err and "checks[0].body" in err
    assert not out.exists()


def test_missing_seed_is_status_2(tmp_path, capsys):
    m = _manifest(tmp_path, [{"check": "santalo", "body": "square"}])
    assert main(["run", "--manifest", str(m)]) == 2
    assert "seed" in capsys.readouterr().err


def test_failing_check_is_status_1(tmp_path):
    m = _manifest(tmp_path, [{"check": "unconditional", "body": "hexagon", "params": {"expect": True}, "seed": 0}])
    assert main(["run", "--manifest", str(m)]) == 1


def test_missing_manifest(tmp_path, capsys):
    assert main(["run", "--manifest", str(tmp_path / "none.json")]) == 2


def test_manifest_validation_runs_before_checks(tmp_path):
    m = _manifest(tmp_path, [{"check": "stability", "seed": 0},
                             {"check": "functional-santalo", "params": {"grid": "missing.json"}, "seed": 0}])
    with pytest.raises(InputError, match="params.grid"):
        load_manifest(m)


def test_volume_command(capsys):
    assert main(["volume", "--in", "hexagon"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["value"] == pytest.approx(12.0) and doc["method"] == "exact"
    assert main(["volume", "--in", "ball2", "--method", "mc", "--samples", "20000", "--seed", "1"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert set(doc) == {"value", "std_error", "samples", "seed", "method"}


def test_body_polar_command(tmp_path, capsys):
    out = tmp_path / "p.json"
    assert main(["body", "polar", "--in", "square", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["kind"] == "l1sum"


def test_mahler_command(capsys):
    assert main(["mahler", "--in", "cube3"]) == 0
    assert json.loads(capsys.readouterr().out)["mahler"] == pytest.approx(32 / 3)


def test_verify_commands(capsys):
    assert main(["verify", "lemma35", "--in", "double_cone", "--x", "0,0,1"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["rows"][0]["lhs"] == pytest.approx(3.141592653589793 / 6)
    assert main(["verify", "rho", "--body", "cube", "--dim", "2"]) == 0
    assert main(["verify", "eta", "--dim", "2", "--lattice-radius", "50"]) == 0
    assert main(["verify", "poisson", "--fn", "sinc2", "--dim", "1", "--lattice-radius", "10"]) == 0
    assert main(["verify", "lemma34", "--f", "tent", "--p", "1.0"]) == 0
    assert main(["verify", "lemma34", "--f", "tent", "--tol", "-1"]) == 1


def test_verify_needs_body(capsys):
    assert main(["verify", "santalo"]) == 2


def test_functional_polar_and_verify(tmp_path, capsys):
    grid = tmp_path / "g.json"
    assert main(["functional", "polar", "--fn", "indicator", "--body", "ball2", "--m", "65", "--out", str(grid)]) == 0
    doc = json.loads(grid.read_text())
    assert {"dim", "extent", "m", "values"} <= set(doc) and len(doc["values"]) == 65 * 65
    assert main(["verify", "involution", "--grid", str(grid)]) == 0
    assert main(["verify", "functional-santalo", "--fn", "gaussian", "--dim", "2", "--m", "129"]) == 0


def test_bm_command(capsys):
    assert main(["bm-distance", "--a", "diamond", "--b", "square", "--restarts", "8"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["d_upper"] <= 1 + 1e-6 and len(doc["T"]) == 2


def test_stability_command(tmp_path):
    out = tmp_path / "t.csv"
    assert main(["stability", "--dim", "3", "--eps", "0.1", "--trials", "3", "--out", str(out)]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["eps", "trial", "P", "delta_P", "d_hat_minus_1", "ratio"] and len(rows) == 4


def test_paper_suite_subset(capsys):
    assert main(["paper-suite", "--only", "1,5,14"]) == 0
    text = capsys.readouterr().out
    assert "criterion  1" in text and "3/3 criteria pass" in text


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "volprod.cli", "volume", "--in", "diamond"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["value"] == pytest.approx(2.0)


@settings(max_examples=10)
@given(st.integers(0, 2 ** 31 - 1))
def test_reseeded_manifest_is_reproducible(seed):
    import tempfile
    from pathlib import Path

    with tempfile.TemporaryDirectory() as d:
        d = Path(d)
        m = _manifest(d, [{"check": "santalo", "body": "ball2", "params": {"method": "mc", "samples": 5000},
                           "seed": seed}])
        main(["run", "--manifest", str(m), "--out", str(d / "a.json")])
        main(["run", "--manifest", str(m), "--out", str(d / "b.json"), "--jobs", "2"])
        assert (d / "a.json").read_bytes() == (d / "b.json").read_bytes()
