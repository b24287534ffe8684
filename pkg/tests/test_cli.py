import csv
import hashlib
import io
import json
import subprocess
import sys

import pytest

from sigmaflow.cli import main


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_ineq_sweep(capsys):
    code, out, _ = _run(capsys, "ineq", "--n", "4", "--samples", "100000", "--seed", "7")
    assert code == 0
    rows = _rows(out)
    assert [int(r["k"]) for r in rows] == [2, 3, 4]
    assert all(float(r["min_normalized"]) >= -1e-10 and r["violations"] == "0" for r in rows)
    assert float(rows[0]["max_oracle_gap"]) <= 1e-10
    assert rows[1]["max_oracle_gap"] == ""


def test_ineq_counterexample(capsys):
    code, out, _ = _run(capsys, "ineq", "--counterexample")
    assert code == 0
    row = _rows(out)[0]
    assert float(row["value"]) == pytest.approx(-6.4, abs=1e-12)
    assert row["max_gamma"] == "2" and row["positive_cone"] == "false"


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["ineq", "--samples", "0"])
    assert exc.value.code == 2
    assert _run(capsys, "ineq", "--n", "3", "--k", "5")[0] == 2
    assert _run(capsys, "pinch", "--lambda=1,-1,1")[0] == 2
    assert _run(capsys, "pinch")[0] == 2
    assert _run(capsys, "shrinker", "--f", "cube:k=1", "--n", "2")[0] == 2
    code, _, err = _run(capsys, "geom", "shrinker", "--shape", "sphere:1")
    assert code == 2 and "needs --f" in err


def test_constants_table(capsys):
    code, out, _ = _run(capsys, "constants", "--n", "3:4")
    assert code == 0
    rows = _rows(out)
    find = lambda kind, n, idx: [r for r in rows if r["kind"] == kind and r["n"] == str(n) and r["index"] == idx]  # noqa: E731
    assert float(find("delta_independent", 3, "")[0]["value"]) == 1.0
    assert float(find("theta", 3, "1")[0]["value"]) == pytest.approx(0.866025, abs=5e-7)
    assert float(find("delta", 4, "3")[0]["value"]) == pytest.approx(0.720759, abs=5e-7)
    assert abs(float(find("delta", 4, "2")[0]["margin"])) <= 1e-12


def test_pinch_reports(capsys):
    code, out, _ = _run(capsys, "pinch", "--lambda", "2,2,2,2", "--k", "3", "--alpha", "0.5")
    assert code == 0
    row = _rows(out)[0]
    assert float(row["ratioMin"]) == pytest.approx(4 / 3, abs=1e-12)
    assert row["admissible"] == "true"
    code, out, _ = _run(capsys, "pinch", "--lambda", "1,1,1,4")
    assert code == 1 and _rows(out)[0]["witness"].split()[0] == "3"
    code, out, _ = _run(capsys, "pinch", "--lambda", "1,1,1,100", "--section5", "2")
    assert code == 1
    code, out, _ = _run(capsys, "pinch", "--remark14-sweep", "--samples", "10000")
    assert code == 0
    assert all(r["violations"] == "0" for r in _rows(out))


def test_shrinker_command(capsys):
    code, out, _ = _run(capsys, "shrinker", "--f", "sigma:k=1,alpha=1", "--n", "2")
    assert code == 0
    row = _rows(out)[0]
    assert float(row["radius"]) == pytest.approx(1.41421356, abs=1e-8)
    assert float(row["sphere_residual"]) <= 1e-10
    code, out, _ = _run(capsys, "shrinker", "--f", "ratio:k=2", "--n", "3")
    assert _rows(out)[0]["every_radius"] == "true"
    code, out, _ = _run(capsys, "shrinker", "--f", "sigma:k=2,alpha=1", "--n", "4", "--terms", "200", "--seed", "3")
    assert code == 0
    row = _rows(out)[0]
    assert int(row["term_samples"]) == 200 and float(row["min_term1"]) >= 0


def test_geom_commands(capsys, tmp_path):
    code, out, _ = _run(capsys, "geom", "minkowski", "--shape", "ellipsoid:1,1.2", "--k", "2", "--samples", "4096")
    assert code == 0 and abs(float(_rows(out)[0]["residual"])) <= 1e-6
    code, out, _ = _run(capsys, "geom", "shrinker", "--shape", "ellipsoid:1,1.2", "--f", "sigma:k=1", "--samples", "257")
    assert code == 1 and float(_rows(out)[0]["max_residual"]) > 0.01
    code, out, _ = _run(capsys, "geom", "theorem18", "--shape", "sphere:0.9", "--n", "3", "--f", "ratio:k=2", "--k", "2")
    assert code == 0 and abs(float(_rows(out)[0]["level_k"])) <= 1e-10
    path = tmp_path / "s.csv"
    assert _run(capsys, "geom", "samples", "--shape", "sphere:1", "--samples", "33", "--out", str(path))[0] == 0
    assert len(path.read_text().splitlines()) == 34


def test_json_output(capsys):
    code, out, _ = _run(capsys, "ineq", "--n", "3", "--samples", "50", "--format", "json")
    data = json.loads(out)
    assert code == 0 and [d["k"] for d in data] == [2, 3]
    assert data[1]["max_oracle_gap"] is None


def test_environment_output_dir(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("SIGMAFLOW_OUTPUT_DIR", str(tmp_path))
    assert _run(capsys, "constants", "--n", "3")[0] == 0
    assert (tmp_path / "constants.csv").exists()
    assert capsys.readouterr().out == ""


def _digest(path):
    h = hashlib.sha256()
    for f in sorted(p for p in path.rglob("*") if p.is_file()):
        h.update(f.relative_to(path).as_posix().encode())
        h.update(f.read_bytes())
    return h.hexdigest()


def test_determinism(capsys, tmp_path):
    for tag in ("a", "b"):
        main(["ineq", "--n", "2:5", "--samples", "2000", "--seed", "11", "--out", str(tmp_path / tag / "ineq.csv")])
        main(["flow", "run", "--shape", "sphere:1", "--max-steps", "30", "--out", str(tmp_path / tag / "flow")])
    capsys.readouterr()
    assert _digest(tmp_path / "a") == _digest(tmp_path / "b")
    main(["ineq", "--n", "2:5", "--samples", "2000", "--seed", "12", "--out", str(tmp_path / "c.csv")])
    assert (tmp_path / "c.csv").read_bytes() != (tmp_path / "a" / "ineq.csv").read_bytes()


def test_flow_run_matches_closed_form(capsys, tmp_path):
    code, out, _ = _run(capsys, "flow", "run", "--shape", "sphere:2", "--f", "sigma:k=1,alpha=1", "--out", str(tmp_path))
    manifest = json.loads(out)
    assert code == 0
    assert manifest["stopReason"] == "r_min"
    assert manifest["closedFormMaxRelError90"] <= 1e-6
    rows = _rows((tmp_path / "trajectory.csv").read_text())
    assert len(rows) == manifest["steps"] + 1
    assert json.loads((tmp_path / "manifest.json").read_text()) == manifest


def test_flow_selfsimilar_command(capsys, tmp_path):
    code, out, _ = _run(
        capsys, "flow", "selfsimilar", "--shape", "sphere:1.4142135623730951", "--t-frac", "0.85",
        "--cfl", "0.1", "--no-profiles", "--out", str(tmp_path),
    )
    assert code == 0
    assert json.loads(out)["selfSimilar"]["maxDeviation"] <= 1e-4
    assert not (tmp_path / "profiles").exists()
    code, _, err = _run(capsys, "flow", "selfsimilar", "--shape", "sphere:1", "--f", "sum:a1=1,a2=1",
                        "--max-steps", "10", "--out", str(tmp_path / "x"))
    assert code == 2 and "homogeneous" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "sigmaflow", "ineq", "--counterexample", "--format", "json"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)[0]["value"] == pytest.approx(-6.4)
