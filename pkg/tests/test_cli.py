import csv
import json
from pathlib import Path

import numpy as np
import pytest

from autowedge.cli import TRACE_HEADER, fmt, main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def cfg(name):
    return str(CONFIGS / f"{name}.json")


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_config(tmp_path, doc, name="c.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def test_number_format():
    assert fmt(-0.0) == "0.0000000000000000e+00"
    assert fmt(1 / 3) == "3.3333333333333331e-01"
    assert fmt(-2.5e-300) == "-2.5000000000000000e-300"


def test_check_baseline(capsys):
    assert main(["check", "--config", cfg("baseline")]) == 0
    out = capsys.readouterr().out
    assert "kappa=1.0000000000000000e+00" in out
    assert "jump[side1].winding=0" in out and out.rstrip().endswith("status=ok")


def test_check_real_frequency_is_not_elliptic(capsys):
    assert main(["check", "--config", cfg("real_helmholtz")]) == 2
    assert "error: NOT_STRONGLY_ELLIPTIC:" in capsys.readouterr().err


def test_check_complex_impedance_is_singular(capsys):
    assert main(["check", "--config", cfg("winding")]) == 3
    assert "error: SINGULAR_JUMP:" in capsys.readouterr().err


def test_unknown_config_key(tmp_path, capsys):
    doc = json.loads(Path(cfg("baseline")).read_text())
    doc["numerics"] = {"rh_node": 10}
    assert main(["check", "--config", write_config(tmp_path, doc)]) == 64
    assert "numerics.rh_node: unknown key" in capsys.readouterr().err


def test_usage_errors_exit_64(capsys):
    with pytest.raises(SystemExit) as info:
        main(["check"])
    assert info.value.code == 64
    assert main(["check", "--config", cfg("baseline"), "--nodes", "0"]) == 64


def test_solve_baseline(tmp_path):
    out = tmp_path / "run"
    assert main(["solve", "--config", cfg("baseline"), "--out", str(out)]) == 0
    assert (out / "traces.csv").read_text().splitlines()[0] == TRACE_HEADER
    rows = read_csv(out / "traces.csv")
    row = next(r for r in rows if r["side"] == "2" and float(r["re_z"]) == 0 and float(r["im_z"]) == 1)
    assert float(row["re_phi"]) == pytest.approx(-1 / 3, abs=1e-9)
    assert abs(float(row["im_phi"])) < 1e-9
    field = read_csv(out / "field.csv")
    assert list(field[0]) == ["x1", "x2", "re_u", "im_u"] and len(field) == 61 * 61
    u = {(float(r["x1"]), float(r["x2"])): float(r["re_u"]) for r in field}
    assert u[(1.0, 2.0)] == pytest.approx(np.exp(-0.6 - 1.6), rel=1e-6)
    manifest = dict(line.split("=", 1) for line in (out / "manifest.txt").read_text().splitlines())
    assert manifest["parts"] == "2" and float(manifest["inversion_change"]) < 1e-3
    res = {r["quantity"]: float(r["value"]) for r in read_csv(out / "residuals.csv")}
    assert res["interior"] < 1e-3


def test_solve_zero_data_writes_zeros(tmp_path):
    out = tmp_path / "zero"
    assert main(["solve", "--config", cfg("zero"), "--out", str(out)]) == 0
    for name, cols in (("traces.csv", ("re_phi", "im_phi")), ("field.csv", ("re_u", "im_u"))):
        for r in read_csv(out / name):
            assert all(r[c] == "0.0000000000000000e+00" for c in cols)
    for r in read_csv(out / "residuals.csv"):
        if r["quantity"] != "hx":
            assert float(r["value"]) == 0


def test_verify_passes_impedance(capsys):
    assert main(["verify", "--config", cfg("impedance")]) == 0
    out = capsys.readouterr().out
    assert "all invariants passed" in out and "FAIL" not in out


def test_verify_zero_data(capsys):
    assert main(["verify", "--config", cfg("zero")]) == 0
    assert "zero_output" in capsys.readouterr().out


def test_verify_names_the_first_failure(tmp_path, capsys):
    doc = json.loads(Path(cfg("baseline")).read_text())
    doc["tolerances"] = {"traces_exact": 1e-30}
    assert main(["verify", "--config", write_config(tmp_path, doc)]) == 1
    out = capsys.readouterr().out
    assert "FAILED: traces_exact" in out


def test_verify_rejects_unknown_invariants(tmp_path, capsys):
    doc = json.loads(Path(cfg("baseline")).read_text())
    doc["tolerances"] = {"nonsense": 1.0}
    assert main(["verify", "--config", write_config(tmp_path, doc)]) == 64


def test_sweep_single_epsilon(tmp_path):
    doc = json.loads(Path(cfg("sweep")).read_text())
    doc["sweep"]["epsilons"] = [0.2]
    out = tmp_path / "s"
    assert main(["sweep-eps", "--config", write_config(tmp_path, doc), "--out", str(out)]) == 0
    rows = read_csv(out / "sweep.csv")
    assert len(rows) == 5 and all(r["successive_diff"] == "" for r in rows)


def test_sweep_with_zero_epsilon_fails(tmp_path, capsys):
    doc = json.loads(Path(cfg("sweep")).read_text())
    doc["sweep"]["epsilons"] = [0.2, 0.0]
    assert main(["sweep-eps", "--config", write_config(tmp_path, doc), "--out", str(tmp_path)]) == 2
    assert "NOT_STRONGLY_ELLIPTIC" in capsys.readouterr().err


def test_sweep_requires_its_block(tmp_path):
    assert main(["sweep-eps", "--config", cfg("baseline"), "--out", str(tmp_path)]) == 64


def test_rh_unit_coefficient(tmp_path):
    assert main(["rh", "--config", cfg("rh_unit"), "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "rh.csv")
    assert len(rows) == 25
    for r in rows:
        assert float(r["re_T_plus"]) == 1 and float(r["im_T_plus"]) == 0
        assert float(r["re_T_minus"]) == 1 and float(r["im_T_minus"]) == 0


def test_rh_rational(tmp_path):
    assert main(["rh", "--config", cfg("rh_rational"), "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "rh.csv")
    assert max(float(r["jump_residual"]) for r in rows) < 1e-6
    assert max(float(r["T_jump_residual"]) for r in rows) < 1e-6


def test_rh_nonzero_winding(tmp_path, capsys):
    assert main(["rh", "--config", cfg("rh_winding"), "--out", str(tmp_path)]) == 3
    assert "SINGULAR_JUMP" in capsys.readouterr().err


def test_verify_passes_the_sweep_config(capsys):
    assert main(["verify", "--config", cfg("sweep")]) == 0
    assert "sweep_cauchy" in capsys.readouterr().out
