import csv
import json
import math

import numpy as np
import pytest

from sharpadams.cli import EXIT_CONFIG, EXIT_OK, main


def run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr().out


def read_csv(text):
    lines = text.splitlines()
    assert lines[0].startswith("# ")
    meta = json.loads(lines[0][2:])
    return meta, list(csv.DictReader(lines[1:]))


def write_profile(path, r, v):
    path.write_text("r,value\n" + "".join(f"{float(a)!r},{float(b)!r}\n" for a, b in zip(r, v)))


def test_constants(capsys):
    code, out = run(["constants", "--dim", "4", "--order", "2"], capsys)
    body = json.loads(out)
    assert code == EXIT_OK
    assert body["beta_nm"] == pytest.approx(32 * math.pi ** 2, rel=1e-12)
    assert body["beta_nm"] == pytest.approx(315.827, abs=1e-3)
    assert body["meta"]["config"]["dim"] == 4


def test_constants_bad_k(capsys):
    assert main(["constants", "--dim", "4", "--order", "2", "--k", "2"]) == EXIT_CONFIG
    code, out = run(["constants", "--dim", "2", "--order", "1"], capsys)
    assert code == EXIT_OK and json.loads(out)["c_nk"] is None


@pytest.mark.parametrize("argv", [
    ["constants", "--dim", "3", "--order", "3"],
    ["constants", "--dim", "x", "--order", "1"],
    ["bogus"],
    [],
    ["sweep", "--dim", "2", "--order", "1", "--jmax", "4"],
    ["sweep", "--dim", "2", "--order", "1", "--alpha", "1.0"],
    ["verify", "--suite", "nope"],
    ["kernels", "--order", "3", "--dim", "4"],
])
def test_config_errors(argv):
    assert main(argv) == EXIT_CONFIG


def test_missing_input(tmp_path):
    assert main(["rearrange", "--in", str(tmp_path / "none.csv"), "--dim", "3"]) == EXIT_CONFIG
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\n1,2\n")
    assert main(["rearrange", "--in", str(bad), "--dim", "3"]) == EXIT_CONFIG


def test_solve_round_trip(tmp_path, capsys):
    n, R = 3, 2.0
    r = np.linspace(0.0, R, 2001)
    src = tmp_path / "f.csv"
    write_profile(src, r, np.ones_like(r))
    out = tmp_path / "u.csv"
    assert main(["solve", "--op", "laplace", "--dim", str(n), "--radius", str(R), "--in", str(src),
                 "--out", str(out)]) == EXIT_OK
    meta, rows = read_csv(out.read_text())
    got = np.array([float(x["value"]) for x in rows])
    rr = np.array([float(x["r"]) for x in rows])
    np.testing.assert_allclose(got, (R ** 2 - rr ** 2) / (2 * n), atol=1e-6 * R ** 2 / (2 * n))
    assert meta["config"]["op"] == "laplace"
    # the solution feeds straight into rearrange
    code, text = run(["rearrange", "--in", str(out), "--dim", str(n)], capsys)
    _, star = read_csv(text)
    levels = [float(x["level"]) for x in star]
    assert code == EXIT_OK and levels == sorted(levels, reverse=True)
    assert float(star[-1]["t"]) == pytest.approx(4 / 3 * math.pi * R ** 3, rel=1e-12)


def test_solve_radius_mismatch(tmp_path):
    src = tmp_path / "f.csv"
    write_profile(src, np.linspace(0, 1, 100), np.ones(100))
    assert main(["solve", "--op", "helmholtz", "--dim", "3", "--radius", "2", "--in", str(src)]) == EXIT_CONFIG


def test_functional(tmp_path, capsys):
    src = tmp_path / "u.csv"
    write_profile(src, np.linspace(0, 1, 50), np.zeros(50))
    code, out = run(["functional", "--in", str(src), "--dim", "2", "--order", "1", "--normalize"], capsys)
    assert code == EXIT_OK and json.loads(out)["value"] == pytest.approx(1.0, rel=1e-12)


def test_kernels_csv(capsys):
    code, out = run(["kernels", "--order", "2", "--dim", "6", "--size", "4"], capsys)
    meta, rows = read_csv(out)
    assert code == EXIT_OK and len(rows) == 16
    assert set(rows[0]) == {"t", "s", "value", "error", "bound_ratio"}
    assert meta["sup_ratio"] == max(float(x["bound_ratio"]) for x in rows)


def test_sweep_csv(capsys):
    code, out = run(["sweep", "--dim", "2", "--order", "1", "--jmax", "64", "--mult", "0.9",
                     "--nodes", "1024"], capsys)
    _, rows = read_csv(out)
    assert code == EXIT_OK
    assert [int(x["j"]) for x in rows] == [8, 16, 32, 64]
    assert all(x["diverged"] == "false" for x in rows)


def test_verify_deterministic(tmp_path):
    path = tmp_path / "v.json"
    runs = []
    for _ in range(2):
        assert main(["verify", "--suite", "hardy", "--seed", "7", "--out", str(path)]) == EXIT_OK
        runs.append(path.read_bytes())
    assert runs[0] == runs[1]
    body = json.loads(runs[0])
    assert body["pass"] is True and body["meta"]["seed"] == 7
