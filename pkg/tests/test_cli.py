import json
import math
import subprocess
import sys

import pytest

from volgrowth.cli import main
from volgrowth.harness import EXIT_ERROR, EXIT_FAIL, EXIT_OK, THEOREM1_CAVEAT

from oracles import LOG_GOLDEN_SQ
from test_harness import SMALL


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_cohomology_matrix_json(capsys):
    code, out = run(capsys, "cohomology", "--matrix", "[[2,1],[1,1]]", "--json")
    doc = json.loads(out.out)
    assert code == EXIT_OK
    assert (doc["unstable"], doc["center"], doc["stable"], doc["degree"]) == (1, 0, 1, 1)
    assert doc["log_spec"] == pytest.approx(LOG_GOLDEN_SQ, abs=1e-12)
    assert doc["certificate"]["holds"]


def test_cohomology_degree_and_catalog(capsys):
    code, out = run(capsys, "cohomology", "--system", "t3-complex", "--json")
    doc = json.loads(out.out)
    assert doc["degree"] == 2 and doc["log_spec"] == pytest.approx(2 * math.log(1.2106), abs=1e-4)


def test_cohomology_rejects_non_unimodular(capsys):
    code, out = run(capsys, "cohomology", "--matrix", "[[2,1],[1,2]]")
    assert code == EXIT_ERROR and "error" in out.err


def test_invariants_lyapunov(capsys):
    code, out = run(capsys, "invariants", "--system", "cat", "--estimator", "lyapunov", "--lyapunov-n", "10000",
                    "--json")
    doc = json.loads(out.out)
    assert code == EXIT_OK and doc["u"] == 1
    assert doc["lyapunov"]["exponents"] == pytest.approx([-LOG_GOLDEN_SQ, LOG_GOLDEN_SQ], abs=1e-6)


def test_verify_malformed_config(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"schema_version": 1, "name": ')
    assert run(capsys, "verify", "--config", str(bad))[0] == EXIT_ERROR
    bad.write_text(json.dumps({"schema_version": 1, "name": "x"}))
    code, out = run(capsys, "verify", "--config", str(bad))
    assert code == EXIT_ERROR and "system" in out.err
    assert run(capsys, "verify", "--config", str(tmp_path / "missing.json"))[0] == EXIT_ERROR


def test_verify_and_report(tmp_path, capsys):
    cfg = tmp_path / "small.json"
    cfg.write_text(json.dumps(SMALL))
    code, out = run(capsys, "verify", "--config", str(cfg), "--out", str(tmp_path / "out"),
                    "--check", "theorem2", "--check", "theorem1")
    assert code == EXIT_FAIL
    assert "theorem2    PASS" in out.out and "theorem1    FAIL" in out.out
    report = tmp_path / "out" / "report.json"
    assert json.loads(report.read_text())["seed"] == SMALL["seed"]

    code, out = run(capsys, "report", str(report))
    assert code == EXIT_FAIL
    assert "[FAIL] theorem1" in out.out and THEOREM1_CAVEAT in out.out


def test_verify_seed_override_without_outputs(tmp_path, capsys):
    cfg = tmp_path / "small.json"
    cfg.write_text(json.dumps(SMALL))
    code, out = run(capsys, "verify", "--config", str(cfg), "--seed", "3", "--check", "ordering",
                    "--out", str(tmp_path / "o"), "--no-json", "--no-csv")
    assert code == EXIT_OK and not (tmp_path / "o" / "report.json").exists()


def test_console_module_entry():
    done = subprocess.run([sys.executable, "-m", "volgrowth.cli", "cohomology", "--matrix", "[[1,0],[0,1]]",
                           "--json"], capture_output=True, text=True, check=False)
    assert done.returncode == 0 and json.loads(done.stdout)["center"] == 2
