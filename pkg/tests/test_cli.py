import csv
import io
import json
import math
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from hillkrein import cli
from hillkrein.stability import Verdict

SCHEMA = json.loads((Path(__file__).resolve().parents[1] / "schema" / "report.json").read_text())
BASE = ["--kappa1", "2", "--kappa2", "3", "--family", "dnoidal", "-L", "6.2832", "--k", "0.8"]


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_report_unstable_and_schema(capsys):
    code, out, _ = run(capsys, "report", *BASE, "--gamma", "1")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, SCHEMA)
    assert doc["schema_version"] == 1
    assert doc["krein"]["verdict"] == "unstable"
    assert doc["jl"]["agree"] is True
    # round trip is byte-identical
    assert cli.dumps(json.loads(out)) == out


def test_report_stable(capsys):
    code, out, _ = run(capsys, "report", *BASE, "--gamma", "5")
    assert code == 0
    assert json.loads(out)["krein"]["verdict"] == "stable"


def test_report_bad_modulus(capsys):
    code, out, err = run(capsys, "report", *BASE[:-1], "1.5", "--gamma", "1")
    assert code == 1 and out == ""
    assert "k:" in err


@pytest.mark.parametrize("argv,field", [
    (["--kappa2", "3", "--gamma", "1", "--family", "dnoidal", "--k", "0.8"], "kappa1"),
    (["--kappa1", "2", "--kappa2", "3", "--gamma", "2.5", "--family", "dnoidal", "--k", "0.8"], "gamma"),
    (["--kappa1", "2", "--kappa2", "3", "--gamma", "1", "--family", "dnoidal"], "k"),
    (["--kappa1", "2", "--kappa2", "3", "--gamma", "1", "--family", "dnoidal", "--k", "0.8", "--N", "90"], "N"),
    (["--kappa1", "2", "--kappa2", "3", "--gamma", "1", "--k", "0.8"], "family"),
])
def test_report_input_errors_name_field(capsys, argv, field):
    code, out, err = run(capsys, "report", *argv)
    assert code == 1 and out == ""
    assert f"{field}:" in err


def test_usage_error_is_input_error(capsys):
    code, _, _ = run(capsys, "report", "--family", "sech")
    assert code == 1


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"kappa1": 2, "kappa2": 3, "gamma": 1, "family": "dnoidal", "k": 0.8}))
    code, out, _ = run(capsys, "report", "--config", str(cfg))
    assert code == 0 and json.loads(out)["krein"]["verdict"] == "unstable"
    code, out, _ = run(capsys, "report", "--config", str(cfg), "--gamma", "5")
    assert code == 0 and json.loads(out)["krein"]["verdict"] == "stable"


def test_config_file_errors(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"kappa1": 2, "kappa3": 3}))
    code, _, err = run(capsys, "report", "--config", str(cfg))
    assert code == 1 and "kappa3:" in err
    cfg.write_text("{not json")
    code, _, err = run(capsys, "report", "--config", str(cfg))
    assert code == 1 and "config:" in err
    code, _, err = run(capsys, "report", "--config", str(tmp_path / "missing.json"))
    assert code == 1 and "config:" in err


def test_report_agreement_failure_exit(capsys):
    code, out, err = run(capsys, "report", *BASE, "--gamma", "5", "--re-tol", "1e-14")
    assert code == 2
    doc = json.loads(out)
    assert doc["jl"]["agree"] is False
    assert "disagrees" in err


def test_report_free_B_and_semitrivial(capsys):
    code, out, _ = run(capsys, "report", "--kappa1", "1", "--kappa2", "1", "--gamma", "1", "--B", "0.7",
                       "--family", "cnoidal", "--k", "0.8")
    doc = json.loads(out)
    assert code == 0 and doc["config"]["b_mode"] == "free" and doc["krein"]["n_L"] == 4
    code, out, _ = run(capsys, "report", "--kappa1", "2", "--kappa2", "3", "--gamma", "4", "--semi-trivial",
                       "--family", "snoidal", "--parity", "odd", "--k", "0.8")
    doc = json.loads(out)
    jsonschema.validate(doc, SCHEMA)
    assert code == 0 and doc["krein"]["verdict"] == "unstable"


def test_report_to_file(tmp_path, capsys):
    target = tmp_path / "r.json"
    code, out, _ = run(capsys, "report", *BASE, "--gamma", "1", "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["krein"]["n_L"] == 2


def _rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_eta_curve_two_points(capsys):
    code, out, _ = run(capsys, "eta-curve", "--n", "2")
    rows = _rows(out)
    assert code == 0 and rows[0] == ["k", "eta"] and len(rows) == 3
    assert float(rows[1][0]) == 0.72 and float(rows[2][0]) == 0.99


def test_eta_curve_deterministic_file(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, "eta-curve", "--n", "5", "--out", str(a))[0] == 0
    assert run(capsys, "eta-curve", "--n", "5", "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    for row in _rows(a.read_text())[1:]:
        # 17 significant digits, '.' decimal separator
        assert "." in row[1] and float(row[1]) > 0
        assert len(row[1].replace(".", "").replace("-", "").lstrip("0").split("e")[0]) <= 17


def test_eta_curve_unwritable(capsys):
    code, _, err = run(capsys, "eta-curve", "--n", "2", "--out", "/nonexistent-dir/x.csv")
    assert code == 1 and "out:" in err


def test_eta_curve_bad_range(capsys):
    code, _, err = run(capsys, "eta-curve", "--k-min", "0.5")
    assert code == 1 and "k_min:" in err


@pytest.mark.parametrize("theorem,expected", [
    ("1.5", ["unstable", "stable", "stable", "stable"]),
    ("1.7", ["stable", "stable", "unstable", "unstable"]),
])
def test_theorem_table_odd(capsys, theorem, expected, tmp_path):
    target = tmp_path / "t.csv"
    code, out, _ = run(capsys, "theorem-table", theorem, "--out", str(target))
    rows = _rows(out)
    assert code == 0
    assert rows[0] == cli.TABLE_HEADER
    assert [r[9] for r in rows[1:]] == expected
    assert all(r[-1] == "yes" for r in rows[1:])
    assert target.read_text() == out


def test_theorem_table_mismatch_exit(capsys, monkeypatch):
    scen, fam, par, exp = cli.THEOREMS["1.5"]
    monkeypatch.setitem(cli.THEOREMS, "1.5", (scen, fam, par, (Verdict.STABLE,) + exp[1:]))
    code, out, _ = run(capsys, "theorem-table", "1.5")
    assert code == 3
    assert _rows(out)[1][-1] == "no"


def test_theorem_table_thread_count_does_not_change_output(capsys, monkeypatch):
    monkeypatch.setenv("HILLKREIN_THREADS", "1")
    _, serial, _ = run(capsys, "theorem-table", "1.7")
    monkeypatch.setenv("HILLKREIN_THREADS", "4")
    _, parallel, _ = run(capsys, "theorem-table", "1.7")
    assert serial == parallel


def test_bad_thread_env(capsys, monkeypatch):
    monkeypatch.setenv("HILLKREIN_THREADS", "zero")
    code, _, err = run(capsys, "theorem-table", "1.7")
    assert code == 1 and "HILLKREIN_THREADS:" in err


def test_jl_spectrum_csv(capsys):
    code, out, err = run(capsys, "jl-spectrum", *BASE, "--gamma", "1", "--N", "64")
    rows = _rows(out)
    assert code == 0 and rows[0] == ["re", "im", "residual"] and len(rows) == 1 + 4 * 64
    assert float(rows[1][0]) > 0.1   # leading eigenvalue is real and positive
    assert "unstable" in err


def test_wave_dump(capsys):
    code, out, _ = run(capsys, "wave-dump", "--family", "snoidal", "--k", "0.8", "--N", "64")
    rows = _rows(out)
    assert code == 0 and rows[0] == ["x", "phi"] and len(rows) == 65
    assert float(rows[1][1]) == 0.0
    code, out, _ = run(capsys, "wave-dump", "--family", "dnoidal", "--k", "0.8", "--N", "64",
                       "--kappa1", "2", "--kappa2", "3", "--gamma", "1")
    assert code == 0 and float(_rows(out)[1][0]) == 0.0
    code, _, err = run(capsys, "wave-dump", "--family", "cnoidal", "--k", "0.5")
    assert code == 1 and "k:" in err


def test_module_entry_point_keeps_stdout_clean():
    proc = subprocess.run([sys.executable, "-m", "hillkrein", "wave-dump", "--family", "dnoidal",
                           "--k", "0.5", "--N", "64"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "x,phi"
    assert all(line.count(",") == 1 for line in proc.stdout.splitlines())


def test_default_L_is_two_pi(capsys):
    code, out, _ = run(capsys, "report", "--kappa1", "2", "--kappa2", "3", "--gamma", "1",
                       "--family", "dnoidal", "--k", "0.8", "--N", "64")
    assert code == 0 and json.loads(out)["config"]["L"] == 2 * math.pi
