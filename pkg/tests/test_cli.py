import csv
import io
import json
import math
import subprocess
import sys

import pytest

from flatkvol.cli import EXIT_CERT, EXIT_OK, EXIT_USAGE, run


def call(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_build_then_validate(tmp_path, capsys):
    path = tmp_path / "s54.json"
    assert call(capsys, "build", "--bouw-moller", "5", "4", "-o", str(path))[0] == EXIT_OK
    data = json.loads(path.read_text())
    assert set(data) >= {"polygons", "gluings"}
    code, out, _ = call(capsys, "validate", str(path))
    assert code == EXIT_OK
    assert "P1=true P2=true" in out


def test_planarity(capsys):
    code, out, _ = call(capsys, "planarity", "--bouw-moller", "4", "3", "--direction", "inf")
    assert code == EXIT_OK
    assert "planar genus=0" in out


def test_kvol_json(capsys):
    code, out, _ = call(capsys, "kvol", "--bouw-moller", "3", "4", "-L", "3", "--json", "--compare-formula")
    assert code == EXIT_OK
    d = json.loads(out)
    assert d["kvol"] == pytest.approx(d["area"] / math.sin(math.pi / 3) ** 2, rel=1e-9)
    assert d["kvol_formula"] == pytest.approx(d["kvol"], rel=1e-9)


def test_kvol_certify(capsys):
    code, out, _ = call(capsys, "kvol", "--bouw-moller", "5", "4", "-L", "3", "--certify")
    assert code == EXIT_OK and "certificate=pass" in out


def test_saddles_csv_and_intersect(capsys):
    code, out, _ = call(capsys, "saddles", "--example", "torus", "-L", "1.5")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK
    assert list(rows[0]) == ["hol_x", "hol_y", "length", "slope", "k", "p", "q", "is_odd", "is_side", "is_diagonal"]
    assert len(rows) == 8
    assert all(r["slope"] != "-0" for r in rows)
    h = next(i for i, r in enumerate(rows) if (r["hol_x"], r["hol_y"]) == ("1", "0"))
    v = next(i for i, r in enumerate(rows) if (r["hol_x"], r["hol_y"]) == ("0", "1"))
    code, out, _ = call(capsys, "intersect", "--example", "torus", "-L", "1.5", "--a", str(h), "--b", str(v))
    assert code == EXIT_OK
    assert json.loads(out)["algebraic"] == 1


def test_intersect_bad_index(capsys):
    code, _, err = call(capsys, "intersect", "--example", "torus", "-L", "1.5", "--a", "99", "--b", "0")
    assert code == EXIT_USAGE and "out of range" in err


def test_cylinders_csv(capsys):
    code, out, _ = call(capsys, "cylinders", "--bouw-moller", "3", "4")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK and len(rows) == 3
    assert all(float(r["modulus"]) == pytest.approx(2 + math.sqrt(2), rel=1e-9) for r in rows)


def test_kvol_disk_csv(capsys):
    code, out, _ = call(capsys, "kvol-disk", "--bouw-moller", "3", "4", "--point", "0", "1", "--nx", "2")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK
    assert list(rows[0]) == ["x", "y", "sin_theta_plus", "sin_theta_minus", "kvol"]
    assert float(rows[0]["kvol"]) == pytest.approx(6.82842712475, rel=1e-9)


def test_kvol_disk_grid(capsys):
    code, out, _ = call(capsys, "kvol-disk", "--bouw-moller", "5", "4", "--nx", "3", "--ny", "2")
    assert code == EXIT_OK and len(out.strip().splitlines()) == 7


def test_kvol_disk_non_coprime_falls_back(capsys):
    code, out, err = call(capsys, "kvol-disk", "--bouw-moller", "2", "6", "--point", "0", "1")
    assert code == EXIT_OK
    assert json.loads(out) == {"formula": None, "bounded": True, "witness": None}
    assert "unavailable" in err


def test_check_hypotheses(capsys):
    code, out, _ = call(capsys, "check-hypotheses", "--bouw-moller", "3", "4")
    d = json.loads(out)
    assert code == EXIT_OK
    assert set(d["domains"]) == {"D1", "D2", "D3", "D4"}
    assert all(r["H1"] and r["H4"] for r in d["domains"].values())


def test_nonplanar_exit_code(tmp_path, capsys):
    from flatkvol.periodic import two_cylinder_nonplanar_example
    path = tmp_path / "np.json"
    path.write_text(two_cylinder_nonplanar_example().to_json())
    code, out, _ = call(capsys, "planarity", str(path))
    assert code == EXIT_CERT and "non-planar genus=1" in out


def test_usage_errors(capsys):
    assert call(capsys, "kvol")[0] == EXIT_USAGE
    assert call(capsys, "validate", "/nonexistent/file.json")[0] == EXIT_USAGE
    assert call(capsys, "nosuch")[0] == EXIT_USAGE
    assert call(capsys, "kvol", "--bouw-moller", "3", "4", "-L", "0.5")[0] == EXIT_USAGE


def test_twelve_significant_digits(capsys):
    _, out, _ = call(capsys, "kvol", "--bouw-moller", "3", "4", "-L", "3")
    value = next(line for line in out.splitlines() if line.startswith("kvol="))
    assert value == "kvol=6.82842712475"


def test_deterministic(capsys):
    a = call(capsys, "saddles", "--bouw-moller", "3", "4", "-L", "2")[1]
    b = call(capsys, "saddles", "--bouw-moller", "3", "4", "-L", "2")[1]
    assert a == b


def test_module_entry_point():
    env_run = subprocess.run([sys.executable, "-m", "flatkvol", "planarity", "--bouw-moller", "4", "3"],
                             capture_output=True, text=True, env={"KVOL_THREADS": "2", "PATH": ""})
    assert env_run.returncode == 0, env_run.stderr
    assert "planar genus=0" in env_run.stdout


def test_bad_thread_count():
    r = subprocess.run([sys.executable, "-m", "flatkvol", "planarity", "--bouw-moller", "4", "3"],
                       capture_output=True, text=True, env={"KVOL_THREADS": "zero", "PATH": ""})
    assert r.returncode != 0
