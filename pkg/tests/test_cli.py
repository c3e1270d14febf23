import csv
import hashlib
import io
import json
import os
import subprocess
import sys

import pytest

from hyperperc.cli import main


def run(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_errg_example(capsys):
    code, out, _ = run(capsys, "errg", "--n", "3", "--p", "0.5", "--exact")
    assert code == 0
    res = json.loads(out)["result"]
    assert res["chi"] == pytest.approx(2.25)
    assert res["second_moment"] == pytest.approx(5.75)
    assert res["surplus"] == pytest.approx(0.125)


def test_errg_brute_matches_exact(capsys):
    _, a, _ = run(capsys, "errg", "--n", "5", "--p", "0.3", "--brute")
    _, b, _ = run(capsys, "errg", "--n", "5", "--p", "0.3", "--exact")
    assert json.loads(a)["result"]["chi"] == pytest.approx(json.loads(b)["result"]["chi"])


def test_pc_bounds_example(capsys):
    code, out, _ = run(capsys, "pc-bounds", "--d", "4", "--n", "100", "--theta", "1")
    res = json.loads(out)["result"]
    assert code == 0
    assert res["expansion_terms"][0] == pytest.approx(1 / 396)
    assert res["expansion_terms"][1] == pytest.approx(31 / 18 / 396**2)
    assert res["expansion_coefficients"] == ["1", "31/18"]
    assert 0 < res["p_l"] < res["expansion_value"]
    assert "V^-1/3" in res["error_order"]


def test_chi_trivial(capsys):
    code, out, _ = run(capsys, "chi", "--d", "2", "--n", "5", "--p", "0", "--reps", "10")
    res = json.loads(out)["result"]
    assert code == 0 and res["mean"] == 1.0 and res["standard_error"] == 0.0


def test_json_is_sorted_and_stable(capsys):
    args = ("chi", "--d", "2", "--n", "6", "--p", "0.1", "--reps", "300", "--seed", "4")
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args)
    assert a == b
    doc = json.loads(a)
    assert list(doc) == sorted(doc)


def test_csv_header(capsys):
    code, out, _ = run(capsys, "errg", "--residuals", "--lam", "0.5", "--n-list", "100,200",
                       "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0][0] == "lam [-]" or rows[0][0].startswith("n ")
    assert any(h.startswith("r_chi [") for h in rows[0])
    assert len(rows) == 3


def test_out_manifest_and_force(tmp_path, capsys):
    out = tmp_path / "chi.json"
    args = ["chi", "--d", "2", "--n", "5", "--p", "0.1", "--reps", "50", "--out", str(out)]
    assert run(capsys, *args)[0] == 0
    man = json.loads((tmp_path / "chi.json.manifest.json").read_text())
    assert man["outputs"]["chi.json"] == hashlib.sha256(out.read_bytes()).hexdigest()
    assert man["master_seed"] == 0 and "started" in man and "threads" in man
    code, _, err = run(capsys, *args)
    assert code == 2 and "--force" in err
    assert run(capsys, *args, "--force")[0] == 0


@pytest.mark.parametrize("args", [
    ("chi", "--d", "0", "--n", "5", "--p", "0.1"),
    ("chi", "--d", "2", "--n", "5", "--p", "1.5"),
    ("chi", "--d", "2", "--n", "5"),
    ("chi", "--d", "2", "--n", "5", "--p", "0.1", "--reps", "0"),
    ("chi", "--bogus"),
    ("nosuch",),
    ("mixing", "--d", "2", "--n", "3", "--alpha", "0"),
    ("pc", "--d", "3", "--n", "10", "--theta", "0.1"),
    ("verify", "--suite", "nope"),
])
def test_validation_errors(capsys, args):
    assert main(list(args)) == 2


def test_cap_exit_code(capsys):
    assert main(["chi", "--d", "2", "--n", "30", "--p", "0.5", "--reps", "4", "--cap", "100"]) == 4
    assert main(["mixing", "--d", "1", "--n", "3", "--alpha", "0.01"]) == 4


def test_inconclusive_exit_code(capsys):
    code, out, _ = run(capsys, "pc", "--d", "2", "--n", "8", "--theta", "1", "--budget", "3000")
    assert code == 3
    assert json.loads(out)["result"]["inconclusive"] is True


def test_env_threads_override(capsys, monkeypatch):
    monkeypatch.setenv("HYPERPERC_THREADS", "zero")
    assert main(["chi", "--d", "2", "--n", "5", "--p", "0.1", "--reps", "5"]) == 2
    monkeypatch.setenv("HYPERPERC_THREADS", "1")
    assert main(["chi", "--d", "2", "--n", "5", "--p", "0.1", "--reps", "5", "--threads", "3"]) == 0


@pytest.mark.parametrize("args", [
    ("twopoint", "--d", "2", "--n", "4", "--p", "0.1", "--reps", "100"),
    ("twopoint", "--d", "2", "--n", "4", "--p", "0.1", "--reps", "100", "--asymptotics"),
    ("pc", "--d", "1", "--n", "64", "--theta", "1", "--exact"),
    ("pc-tilde", "--d", "1", "--n", "50", "--p-min", "0.01", "--p-max", "0.04", "--exact"),
    ("errg", "--n", "20", "--p", "0.02", "--mc", "--reps", "100"),
    ("explore", "bf", "--d", "2", "--n", "5", "--p", "0.2"),
    ("explore", "brw", "--d", "2", "--n", "5", "--p", "0.2"),
    ("explore", "linewise", "--d", "2", "--n", "5", "--p", "0.2"),
    ("explore", "coupling", "--d", "1", "--n", "50", "--p", "0.01", "--reps", "500"),
    ("explore", "gw", "--d", "2", "--n", "10", "--p", "0.04", "--reps", "50"),
    ("mixing", "--d", "2", "--n", "10", "--t", "3"),
    ("diagrams", "triangle", "--d", "2", "--n", "4", "--p", "0.1", "--reps", "50"),
    ("diagrams", "open-triangle", "--d", "2", "--n", "4", "--p", "0.1", "--reps", "50"),
    ("diagrams", "polygon", "--d", "2", "--n", "4", "--p", "0.1", "--reps", "50", "--i", "4"),
    ("diagrams", "ladder", "--d", "2", "--n", "4", "--p", "0.1", "--reps", "50"),
    ("diagrams", "M", "--d", "2", "--n", "4", "--p", "0.1", "--reps", "50"),
    ("window-study", "--d", "2", "--n-list", "6", "--theta-list", "1", "--budget", "200000"),
])
@pytest.mark.parametrize("fmt", ["json", "csv"])
def test_every_command_runs(capsys, args, fmt):
    code, out, _ = run(capsys, *args, "--format", fmt)
    assert code in (0, 3)
    if fmt == "json":
        assert json.loads(out)["command"] == args[0]
    else:
        lines = out.strip().splitlines()
        assert len(lines) >= 2 and "[" in lines[0]


def test_verify_reports_and_digest(capsys):
    code, out, err = run(capsys, "verify", "--suite", "5,7")
    assert code == 0
    res = json.loads(out)["result"]
    assert res["passed"] and len(res["digest"]) == 64
    assert "[PASS] criterion  5" in err


def test_module_entry_point():
    env = dict(os.environ)
    proc = subprocess.run([sys.executable, "-m", "hyperperc", "mixing", "--d", "2", "--n", "3",
                           "--alpha", "0.3333333333333333"],
                          capture_output=True, text=True, env=env)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["t_mix"] == 4
