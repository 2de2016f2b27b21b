import json
import subprocess
import sys

import pytest

from forestfire import cli


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "forestfire.cli", *args],
                          capture_output=True, text=True, timeout=600)


def lines(text):
    return [l for l in text.splitlines() if not l.startswith("#")]


def test_moments_table():
    r = run_cli("moments", "--n", "0..2")
    assert r.returncode == 0
    assert r.stdout.startswith("# config_sha256=")
    rows = [l.split(",") for l in lines(r.stdout)]
    assert rows[0] == ["n", "mu", "var", "A_n", "A_n_minus_loglog_n"]
    assert [float(x[1]) for x in rows[1:]] == pytest.approx([1, 2, 8 / 3], rel=1e-15)


def test_moments_exact_rationals():
    r = run_cli("moments", "--n", "0..2", "--exact")
    rows = [l.split(",") for l in lines(r.stdout)[1:]]
    assert [x[1] for x in rows] == ["1/1", "2/1", "8/3"]
    assert [x[2] for x in rows] == ["1/1", "2/1", "8/3"]


def test_same_seed_same_bytes(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        r = run_cli("simulate", "--n", "3", "--samples", "500", "--streams", "2",
                    "--seed", "17", "--out", str(path))
        assert r.returncode == 0, r.stderr
    assert a.read_bytes() == b.read_bytes()
    head = a.read_text().splitlines()
    assert "seed=17" in head[0] and head[2] == "site,replica,gap"
    c = run_cli("simulate", "--n", "3", "--samples", "500", "--streams", "2", "--seed", "18")
    assert lines(c.stdout) != lines(a.read_text())


def test_workers_do_not_change_output():
    args = ("simulate", "--n", "2", "--samples", "600", "--streams", "3", "--seed", "5")
    assert run_cli(*args).stdout == run_cli(*args, "--workers", "2").stdout


def test_simulate_json_summary():
    r = run_cli("simulate", "--n", "1", "--samples", "20000", "--seed", "3", "--out", "json")
    doc = json.loads(r.stdout)
    assert doc["meta"]["seed"] == 3 and len(doc["meta"]["config_sha256"]) == 64
    s = doc["summary"]
    assert s["count"] == 20000 and s["mean"] == pytest.approx(2, rel=0.05)
    assert s["ks"] < 0.02 and "0.5" in s["quantiles"]


def test_simulate_graph_mode():
    r = run_cli("simulate", "--graph", "torus:8", "--replicas", "5", "--seed", "1")
    rows = lines(r.stdout)
    assert rows[0] == "replica,time,censored" and len(rows) == 6
    r = run_cli("simulate", "--graph", "path:3", "--target", "3", "--replicas", "50",
                "--seed", "1", "--format", "json")
    assert json.loads(r.stdout)["summary"]["count"] == 50


def test_dickman_and_gd1():
    r = run_cli("dickman", "--eval", "0.7", "2", "--out", "json")
    vals = json.loads(r.stdout)["values"]
    assert vals[0]["rho"] == 1.0 and vals[1]["F"] == pytest.approx(0.6931471805599453)
    r = run_cli("dickman", "--table", "3", "0.5", "--out", "csv")
    rows = lines(r.stdout)
    assert rows[0] == "x,rho,f,F,gd1_cdf" and len(rows) == 8
    r = run_cli("gd1", "--sample", "4", "--seed", "9")
    assert len(lines(r.stdout)) == 5


def test_tailbound_csv():
    r = run_cli("tailbound", "--p", "0.75", "--theta-from-sim", "--grid", "16", "--x", "0:20:5",
                "--replicas", "100", "--theta-replicas", "100", "--out", "csv")
    assert r.returncode == 0, r.stderr
    rows = [l.split(",") for l in lines(r.stdout)]
    assert rows[0] == ["x", "bound", "empirical_survival", "empirical_se"]
    assert len(rows) == 6 and float(rows[1][1]) == 1.0
    r = run_cli("tailbound", "--p", "0.8", "--theta", "0.6", "--x", "1:3:1", "--replicas", "0")
    rows = [l.split(",") for l in lines(r.stdout)]
    assert rows[1][2] == "" and len(rows) == 4


def test_config_file_and_unknown_keys(tmp_path):
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"n": "0..1", "seed": 4}))
    r = run_cli("moments", "--config", str(good))
    assert r.returncode == 0 and "seed=4" in r.stdout
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"n": "0..1", "colour": "red"}))
    r = run_cli("moments", "--config", str(bad))
    assert r.returncode == cli.EXIT_CONFIG
    err = json.loads(r.stderr)
    assert err["error"] == "config" and "colour" in err["message"]


@pytest.mark.parametrize("args", [
    ("moments", "--bogus"),
    ("moments", "--n", "5..2"),
    ("moments", "--n", "0..20", "--exact"),
    ("simulate", "--samples", "0"),
    ("simulate", "--graph", "ring:4"),
    ("tailbound", "--p", "1.2", "--theta", "0.5"),
    ("tailbound", "--p", "0.7"),
    ("dickman",),
    ("gd1", "--eps", "2"),
    ("gd1", "--seed", "-1"),
    ("moments", "--out", "json", "--format", "csv"),
    (),
])
def test_invalid_configs_exit_with_json_error(args):
    r = run_cli(*args)
    assert r.returncode == cli.EXIT_CONFIG
    err = json.loads(r.stderr)
    assert set(err) == {"error", "message"}
    assert r.stdout == ""


def test_runtime_errors_are_json():
    r = run_cli("simulate", "--n", "10", "--samples", "300000000")
    assert r.returncode == cli.EXIT_RUNTIME
    assert json.loads(r.stderr)["error"] == "BudgetError"


def test_config_hash_ignores_output_location():
    a = cli.config_from_args(["gd1", "--out", "x.csv"])
    b = cli.config_from_args(["gd1", "--out", "-", "--workers", "3"])
    c = cli.config_from_args(["gd1", "--seed", "1"])
    assert a.sha256() == b.sha256() != c.sha256()


def test_run_config_rejects_unknown_keys_directly():
    with pytest.raises(cli.ConfigError):
        cli.RunConfig.from_mapping({"subcommand": "gd1", "extra": 1})
    with pytest.raises(cli.ConfigError):
        cli.RunConfig.from_mapping({"subcommand": "nope"})
    with pytest.raises(cli.ConfigError):
        cli.RunConfig.from_mapping({"subcommand": "gd1", "sample": True})


def test_verify_quick():
    r = run_cli("verify", "--quick")
    assert r.returncode == 0, r.stdout + r.stderr
    rows = lines(r.stdout)
    assert len(rows) == 11 and all(",pass," in row for row in rows[1:])
