from __future__ import annotations

import json
import subprocess
import sys
from importlib import resources

import jsonschema
import numpy as np
import pytest

from rkappa import Params4, RLargestSample, data_io, marginal_cdf, sample_rk4d
from rkappa.cli import dumps_json, main, parse_r

MAXIMA = str(resources.files("rkappa") / "data" / "venice_maxima.csv")


def schema(name):
    return json.loads((resources.files("rkappa") / "schemas" / f"{name}.schema.json").read_text())


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture(scope="module")
def sim_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("d") / "sim.csv"
    x = sample_rk4d(60, 3, Params4(0, 1, -0.1, -0.5), seed=2)
    data_io.save(RLargestSample.from_array(x), path)
    return str(path)


def test_parse_r():
    assert parse_r("1..4") == [1, 2, 3, 4]
    assert parse_r("2,5") == [2, 5] and parse_r(3) == [3]


def test_json_digits():
    text = dumps_json({"a": 0.1, "b": [1, None, float("nan")], "c": True})
    assert '"a": 0.10000000000000001' in text
    assert json.loads(text) == {"a": 0.1, "b": [1, None, None], "c": True}


def test_fit_rgevd_maxima(capsys):
    code, out, _ = run(capsys, "fit", "--model", "rgevd", "--r", "1", "--data", MAXIMA)
    assert code == 0
    rows = json.loads(out)
    jsonschema.validate(rows, schema("fit"))
    assert len(rows) == 1 and rows[0]["nllh"] == pytest.approx(222.7, abs=0.05)


def test_fit_sweep_rows_and_table(capsys, sim_csv):
    code, out, _ = run(capsys, "fit", "--r", "1..3", "--data", sim_csv, "--threads", "2")
    rows = json.loads(out)
    jsonschema.validate(rows, schema("fit"))
    assert code == 0 and [r["r"] for r in rows] == [1, 2, 3]
    for key in ("nllh", "params", "se", "r20", "aic", "bic", "trV", "logdetV"):
        assert key in rows[0]
    code, out, _ = run(capsys, "fit", "--r", "2", "--data", sim_csv, "--format", "table")
    line = out.splitlines()[1].split()
    assert line[0] == "2" and len(line[1].replace(".", "").lstrip("-")) <= 6


def test_fit_is_byte_identical(capsys, sim_csv):
    outs = [run(capsys, "fit", "--r", "2", "--data", sim_csv)[1] for _ in range(2)]
    assert outs[0] == outs[1]


def test_usage_errors(capsys, sim_csv):
    assert run(capsys, "fit", "--r", "x..y", "--data", sim_csv)[0] == 2
    assert run(capsys, "fit", "--r", "9", "--data", sim_csv)[0] == 2
    assert run(capsys, "fit", "--model", "nope", "--data", sim_csv)[0] == 2
    assert run(capsys, "fit", "--data", "/no/such/file.csv")[0] == 2
    assert run(capsys, "fit")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2
    code, _, err = run(capsys, "return-level", "--data", sim_csv, "--T", "20", "--p", "0.05")
    assert code == 2 and "not both" in err


def test_config_defaults_and_flag_precedence(capsys, sim_csv, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"data": sim_csv, "model": "rgevd", "r": "1..2",
                               "fit": {"max_iter": 4000}}))
    code, out, _ = run(capsys, "--config", str(cfg), "fit")
    rows = json.loads(out)
    assert code == 0 and [r["model"] for r in rows] == ["rgevd"] * 2
    code, out, _ = run(capsys, "--config", str(cfg), "fit", "--model", "rk4d", "--r", "1")
    rows = json.loads(out)
    assert [(r["model"], r["r"]) for r in rows] == [("rk4d", 1)]
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(capsys, "--config", str(cfg), "fit", "--data", sim_csv)[0] == 2


def test_nonconvergence_exit_3(capsys, sim_csv, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"fit": {"max_iter": 3, "restarts": 0, "h_starts": []}}))
    code, out, _ = run(capsys, "--config", str(cfg), "fit", "--data", sim_csv, "--r", "2")
    rows = json.loads(out)
    assert code == 3 and rows[0]["converged"] is False


def test_return_level_and_missing_cov(capsys, sim_csv, tmp_path):
    fit_file = tmp_path / "fit.json"
    assert main(["fit", "--r", "1..2", "--data", sim_csv, "--out", str(fit_file)]) == 0
    code, out, _ = run(capsys, "return-level", "--fit", str(fit_file), "--T", "20,100")
    rows = json.loads(out)
    jsonschema.validate(rows, schema("return_level"))
    assert code == 0 and len(rows) == 4 and all(r["se"] > 0 for r in rows)
    fits = json.loads(fit_file.read_text())
    fits[0]["cov"] = None
    fit_file.write_text(json.dumps(fits))
    code, out, _ = run(capsys, "return-level", "--fit", str(fit_file), "--r", "1")
    rows = json.loads(out)
    jsonschema.validate(rows, schema("return_level"))
    assert code == 3 and rows[0]["se"] is None and np.isfinite(rows[0]["level"])


def test_sample_deterministic_and_ordered(capsys):
    argv = ["sample", "--n", "5", "--r", "3", "--params", "0,1,-0.1,-0.5", "--seed", "7"]
    a, b = run(capsys, *argv)[1], run(capsys, *argv)[1]
    assert a == b
    lines = a.splitlines()
    assert lines[0] == "x1,x2,x3" and len(lines) == 6
    x = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    assert np.all(np.diff(x, axis=1) <= 0)


def test_sample_errors(capsys):
    assert run(capsys, "sample", "--n", "5", "--r", "3", "--params", "0,1,0.1,0.9")[0] == 2
    assert run(capsys, "sample", "--n", "5", "--r", "3")[0] == 2
    assert run(capsys, "sample", "--n", "5", "--r", "3", "--params", "0,1")[0] == 2


def test_sample_file_passes_ks(capsys, tmp_path):
    from scipy import stats
    out = tmp_path / "s.csv"
    p = Params4(0, 1, -0.1, -0.5)
    assert main(["sample", "--n", "20000", "--r", "3", "--params", "0,1,-0.1,-0.5",
                 "--seed", "1", "--out", str(out)]) == 0
    x = np.loadtxt(out, delimiter=",", skiprows=1)
    for s in (1, 2, 3):
        assert stats.kstest(x[:, s - 1], lambda t: marginal_cdf(s, t, p)).pvalue > 1e-3


def test_qqplot_files(capsys, sim_csv, tmp_path):
    ragged = tmp_path / "ragged.csv"
    ragged.write_text(open(sim_csv).read() + "999,-0.5\n")
    code, out, _ = run(capsys, "qqplot", "--data", str(ragged), "--r", "3",
                       "--out-dir", str(tmp_path / "qq"))
    index = json.loads(out)
    jsonschema.validate(index, schema("qqplot"))
    assert code == 0 and [e["s"] for e in index] == [1, 2, 3]
    assert [e["n_pairs"] for e in index] == [61, 60, 60]
    qq = np.loadtxt(index[0]["qq"], delimiter=",", skiprows=1)
    header = open(index[0]["qq"]).readline().strip()
    assert header == "i,p,empirical,fitted,diagonal"
    np.testing.assert_array_equal(qq[:, 4], qq[:, 2])
    pdf = np.loadtxt(index[2]["pdf"], delimiter=",", skiprows=1)
    assert pdf.shape == (401, 2)


def test_qqplot_with_given_params(capsys, sim_csv, tmp_path):
    code, out, _ = run(capsys, "qqplot", "--data", sim_csv, "--r", "3", "--s", "2",
                       "--params", "0,1,-0.1,-0.5", "--out-dir", str(tmp_path))
    index = json.loads(out)
    assert code == 0 and len(index) == 1 and index[0]["s"] == 2
    assert run(capsys, "qqplot", "--data", sim_csv, "--r", "2", "--s", "3",
               "--params", "0,1,0,0", "--out-dir", str(tmp_path))[0] == 2


def test_module_entry_point(sim_csv):
    res = subprocess.run([sys.executable, "-m", "rkappa", "fit", "--r", "1", "--data", sim_csv,
                          "--model", "rld"], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)[0]["model"] == "rld"
