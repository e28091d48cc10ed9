import csv
import json
import subprocess
import sys

import pytest

from hsrep import cli
from hsrep.classifier import INFINITE, Regime, RegimeVerdict, RhoFate


def run(tmp_path, *argv):
    return cli.main([*argv, "--out", str(tmp_path)])


def test_analyze_writes_verdict(tmp_path, capsys):
    assert run(tmp_path, "analyze", "--example", "3") == cli.EXIT_OK
    d = json.loads((tmp_path / "verdict.json").read_text())
    assert d["schema"] == cli.SCHEMA
    assert d["verdict"]["regime"] == "InvertedTwoSided"
    assert d["verdict"]["theorem_tag"] == "Thm 4.4"
    assert d["root_report"]["multiplicity"] == "Single"
    assert "InvertedTwoSided [Thm 4.4]" in capsys.readouterr().out


def test_infinite_limit_serializes(tmp_path):
    assert run(tmp_path, "analyze", "--lambda", "0", "--kappa", "1") == cli.EXIT_OK
    d = json.loads((tmp_path / "verdict.json").read_text())
    assert d["verdict"]["t_limit"] == {"kind": "Infinite"}


def test_validation_failure_exit_code(tmp_path, capsys):
    code = run(tmp_path, "analyze", "--lambda", "1", "--kappa", "1", "--family", "const",
               "--params", "1,1")
    assert code == cli.EXIT_VALIDATION
    assert "invalid:" in capsys.readouterr().err
    assert run(tmp_path, "analyze") == cli.EXIT_VALIDATION


def test_unclassified_exit_code(tmp_path, monkeypatch):
    v = RegimeVerdict(Regime.UNCLASSIFIED, "", INFINITE, [], RhoFate.BOUNDED, {})
    monkeypatch.setattr(cli, "classify", lambda spec, **kw: v)
    assert run(tmp_path, "analyze", "--example", "1") == cli.EXIT_UNCLASSIFIED


def test_numerical_failure_exit_code(tmp_path):
    # eta beyond eta* is out of range for the representation
    code = run(tmp_path, "solve", "--example", "1", "--eta", "5")
    assert code == cli.EXIT_NUMERICAL


def test_solve_outputs(tmp_path):
    assert run(tmp_path, "solve", "--example", "2", "--time", "0.1,0.3", "--grid", "17") == 0
    m = json.loads((tmp_path / "manifest.json").read_text())
    assert m["files"] == ["integrals.csv", "slice_000.csv", "slice_001.csv"]
    rows = list(csv.reader(open(tmp_path / "slice_001.csv")))
    assert rows[0] == ["alpha", "x", "eta", "t", "jac", "ux", "rho"]
    assert len(rows) == 18
    assert float(rows[1][3]) == pytest.approx(0.3, abs=1e-8)


@pytest.mark.parametrize("k", [1, 4])
def test_example_checks_pass(tmp_path, k):
    assert run(tmp_path, "example", "--example", str(k), "--grid", "33") == 0
    checks = json.loads((tmp_path / "checks.json").read_text())["checks"]
    assert checks and all(c["pass"] for c in checks)
    m = json.loads((tmp_path / "manifest.json").read_text())
    assert m["complete"] and "rates.json" in m["files"]


def test_rates_command(tmp_path):
    assert run(tmp_path, "rates", "--example", "1") == 0
    d = json.loads((tmp_path / "rates.json").read_text())
    for key in ("pbar0_exp", "i2_exp", "ux_at_abar_exp"):
        assert abs(d["measured"][key] - d["predicted"][key]) <= 0.05


def test_sweep_is_deterministic(tmp_path, monkeypatch):
    argv = ["sweep", "--lambda=-1,-0.5,0.5,1", "--kappa=-1,1"]
    monkeypatch.setenv("HS_NUM_THREADS", "1")
    assert run(tmp_path / "a", *argv) == 0
    monkeypatch.setenv("HS_NUM_THREADS", "3")
    assert run(tmp_path / "b", *argv) == 0
    a = (tmp_path / "a" / "atlas.csv").read_bytes()
    assert a == (tmp_path / "b" / "atlas.csv").read_bytes()
    rows = list(csv.DictReader(a.decode().splitlines()))
    assert len(rows) == 8 and all(r["regime"] and not r["error"] for r in rows)


def test_config_file(tmp_path):
    cfg = tmp_path / "p.json"
    cfg.write_text(json.dumps({"lambda": 0.5, "kappa": -1.0,
                               "data": {"family": "affine", "params": [1.0]}}))
    assert run(tmp_path, "analyze", "--config", str(cfg)) == 0
    d = json.loads((tmp_path / "verdict.json").read_text())
    assert d["verdict"]["regime"] == "SteadyStateFiniteTime"
    assert d["spec"]["data"]["bc"] == "dirichlet"


def test_console_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "hsrep.cli", "analyze", "--example", "4",
                        "--out", str(tmp_path)], capture_output=True, text=True)
    assert r.returncode == 0
    assert r.stdout.startswith("SteadyStateFiniteTime [Thm 4.1]")
