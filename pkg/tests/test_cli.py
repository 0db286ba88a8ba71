import csv
import io
import json

import numpy as np
import pytest

from hardy_series.cli import fmt_float, read_config, run


def run_json(capsys, argv):
    code = run(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_xfun_example(capsys):
    code, doc = run_json(capsys, ["xfun", "--i", "2", "--t", "0.3678794"])
    assert code == 0 and doc["schema_version"] == 1
    assert doc["result"]["X"][0] == pytest.approx(0.59061, abs=1e-5)
    assert doc["config"]["i"] == 2


def test_finiteness_all_zero_is_infinite(capsys):
    code, doc = run_json(capsys, ["finiteness", "--beta", "0,0,0"])
    assert code == 0 and doc["result"]["verdict"] == "Infinite"


def test_finiteness_value(capsys):
    code, doc = run_json(capsys, ["finiteness", "--beta", "0,1"])
    assert doc["result"]["verdict"] == "Finite"
    assert doc["result"]["value"] == pytest.approx(1.0, rel=1e-10)


def test_certify_example_exit_zero(capsys):
    code, doc = run_json(capsys, ["certify", "--k", "3", "--p", "2", "--m", "3",
                                  "--D-factor", "1"])
    assert code == 0
    assert doc["result"]["verdict"] == "Certified" and doc["result"]["min_margin"] >= 0


def test_certify_falsified_exit_one(capsys):
    code, doc = run_json(capsys, ["certify", "--k", "3", "--p", "1.5", "--a", "0"])
    assert code == 1 and doc["result"]["verdict"] == "Falsified"


def test_certify_degenerate_and_find_d0(capsys):
    code, doc = run_json(capsys, ["certify-degenerate", "--k", "3", "--m", "2"])
    assert code == 0
    code, doc = run_json(capsys, ["find-d0", "--k", "3", "--p", "1.5", "--m", "2"])
    assert code == 0 and doc["result"]["D0"] >= 1.0 and doc["result"]["case"] == "a"


def test_usage_errors(capsys):
    assert run([]) == 2
    assert run(["nonsense"]) == 2
    assert run(["certify", "--k", "3", "--p", "3"]) == 2
    err = capsys.readouterr().err
    assert json.loads(err.strip().splitlines()[-1])["error"] == "ParameterError"
    assert run(["finiteness", "--beta", "a,b"]) == 2


def test_quotient_from_csv(tmp_path, capsys):
    r = np.geomspace(1e-8, 0.9, 300)
    u = np.sin(np.pi * np.log(r / 0.9) / np.log(1e-8 / 0.9)) ** 2 / np.sqrt(r)
    path = tmp_path / "prof.csv"
    np.savetxt(path, np.c_[r, u], delimiter=",", header="r,u", comments="")
    code, doc = run_json(capsys, ["quotient", "--k", "3", "--csv", str(path)])
    res = doc["result"]
    assert code == 0 and res["quotient"] >= 0.25
    assert res["quotient"] == pytest.approx(res["numerator"] / res["denominator"])


def test_sweep_csv(capsys):
    code = run(["sweep", "--k", "3", "--schedule", "0.1,0.01"])
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert code == 0
    assert rows[0] == ["alpha_0", "alpha_1", "numerator", "denominator", "quotient"]
    assert len(rows) == 3 and float(rows[2][-1]) < float(rows[1][-1])


def test_best_constant_table(capsys):
    code, doc = run_json(capsys, ["best-constant", "--k", "3", "--dofs", "60",
                                  "--refinements", "1", "--length", "20"])
    res = doc["result"]
    assert code == 0 and len(res["rows"]) == 2 and res["nonincreasing"]


def write_cfgs(tmp_path):
    a = tmp_path / "cert.cfg"
    a.write_text("# certificate\ncommand = certify\nk = 3\np = 2\nm = 3\n")
    b = tmp_path / "squeeze.cfg"
    b.write_text("command = best-constant\nk = 3\ndofs = 60\nrefinements = 1\nlength = 20\n")
    c = tmp_path / "sweep.cfg"
    c.write_text("command = sweep\nk = 3\nschedule = 0.1,0.01\n")
    return [a, b, c]


def test_report_is_deterministic(tmp_path, capsys):
    argv = ["report"]
    for p in write_cfgs(tmp_path):
        argv += ["--config", str(p)]
    outs = []
    for fmt in ("json", "json", "md", "md"):
        assert run(argv + ["--format", fmt]) == 0
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1] and outs[2] == outs[3]
    doc = json.loads(outs[0])
    assert [r["command"] for r in doc["result"]["runs"]] == ["certify", "best-constant", "sweep"]
    assert "0.25" in outs[2]


def test_report_errors(tmp_path, capsys):
    assert run(["report"]) == 2
    assert run(["report", "--config", str(tmp_path / "missing.cfg")]) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("k = 3\n")
    assert run(["report", "--config", str(bad)]) == 2


def test_config_parsing(tmp_path):
    p = tmp_path / "x.cfg"
    p.write_text("command = xfun  # trailing comment\n\ni = 2\nt=0.5\n")
    assert read_config(p) == {"command": "xfun", "i": "2", "t": "0.5"}


def test_out_file(tmp_path):
    out = tmp_path / "o.json"
    assert run(["--out", str(out), "xfun", "--i", "1", "--t", "1"]) == 0
    assert json.loads(out.read_text())["result"]["X"] == [1.0]


@pytest.mark.parametrize("x", [0.1, 1 / 3, 1e-300, 2.0, 123456789.123])
def test_float_format_round_trips(x):
    s = fmt_float(x)
    assert float(s) == x and ("." in s or "e" in s)
