import json

import pytest
from click.testing import CliRunner

from fcartier.cli import main


def run(*args):
    res = CliRunner().invoke(main, list(args))
    return res.exit_code, res.output


def test_check_pass():
    code, out = run("check", "--f", "x*y - z*w", "--vars", "x,y,z,w", "--p", "3", "--k", "1")
    assert code == 0
    rep = json.loads(out)
    assert rep["verdicts"][0]["overall"] is True
    assert rep["input"] == {"f": "x*y - z*w", "vars": ["x", "y", "z", "w"], "p": 3, "k": 1}
    assert "timings" not in out


def test_check_negative_verdict():
    code, out = run("check", "--f", "x^3+y^3+z^3", "--vars", "x,y,z", "--p", "5")
    assert code == 1
    assert json.loads(out)["verdicts"][0]["overall"] is False


@pytest.mark.parametrize("args,name", [
    (("--f", "x*y-z*w", "--vars", "x,y,z,w", "--p", "33"), "BadPrime"),
    (("--f", "x*y", "--vars", "x,y,z", "--p", "5"), "NotIsolated"),
    (("--f", "x^3+y^3+z^3", "--vars", "x,y,z", "--p", "3"), "Indeterminate"),
    (("--f", "x+*y", "--vars", "x,y", "--p", "3"), "SyntaxError"),
    (("--f", "x^2+y^2+z^2", "--vars", "x,y,z", "--p", "5", "--k", "1"), "NotReflexive"),
])
def test_check_errors_exit_2(args, name):
    code, out = run("check", *args)
    assert code == 2
    assert json.loads(out)["verdicts"][0]["error"]["error"] == name


def test_usage_errors():
    assert run("check", "--vars", "x", "--p", "3")[0] == 2
    assert run("sweep", "--f", "x*y-z*w", "--vars", "x,y,z,w", "--primes", "")[0] == 2
    assert run("verify", "--suite", "bogus", "--n", "2", "--p", "2")[0] == 2
    assert run("verify", "--suite", "snc", "--n", "2", "--p", "4")[0] == 2


def test_sweep_summary_and_order():
    code, out = run("sweep", "--f", "x^3+y^3+z^3", "--vars", "x,y,z", "--primes", "13,5,7",
                    "--jobs", "1")
    assert code == 1
    rep = json.loads(out)
    assert [v["p"] for v in rep["verdicts"]] == [5, 7, 13]
    assert rep["summary"]["passing_primes"] == [7, 13]
    assert rep["summary"]["failed_primes"] == [5]
    assert rep["summary"]["cells"]["0,2"] == "2/3"


def test_sweep_jobs_deterministic():
    args = ("sweep", "--f", "x^3+y^3+z^3", "--vars", "x,y,z", "--primes", "5,7,11")
    a = run(*args, "--jobs", "1")
    b = run(*args, "--jobs", "3")
    assert a == b


def test_job_file_and_override(tmp_path):
    job = tmp_path / "job.json"
    job.write_text(json.dumps({"f": "x^3+y^3+z^3", "vars": "x,y,z", "p": 5}))
    code, out = run("check", "--job", str(job))
    assert code == 1
    code, out = run("check", "--job", str(job), "--p", "7")
    assert code == 0 and json.loads(out)["input"]["p"] == 7


def test_out_and_timings_files(tmp_path):
    out, tim = tmp_path / "r.json", tmp_path / "t.json"
    code, text = run("check", "--f", "x^2+y^2+z^2", "--vars", "x,y,z", "--p", "3",
                     "--out", str(out), "--timings", str(tim))
    assert code == 0 and text == ""
    rep = json.loads(out.read_text())
    assert "timings" not in json.dumps(rep)
    assert "3" in json.loads(tim.read_text())["timings"]


@pytest.mark.parametrize("args", [
    ("--suite", "cartier", "--n", "2", "--p", "3"),
    ("--suite", "snc", "--n", "3", "--p", "2", "--D", "5"),
    ("--suite", "duality", "--n", "2", "--p", "2", "--E", "x"),
    ("--suite", "hara,residue", "--n", "2", "--p", "2", "--E", "xy", "--D", "4", "--nmax", "2"),
    ("--suite", "residue", "--n", "2", "--p", "3", "--E", "1,2", "--D", "4"),
])
def test_verify_suites(args):
    code, out = run("verify", *args)
    assert code == 0, out
    rep = json.loads(out)
    assert rep["certificates"] and all(c["ok"] for c in rep["certificates"])


def test_version():
    code, out = run("--version")
    assert code == 0 and "0.1.0" in out
