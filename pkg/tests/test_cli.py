import csv
import json
import os
import subprocess
import sys
from pathlib import Path

import pytest
import yaml

from galilax.cli import EXIT_INPUT, EXIT_INTEGRATION, EXIT_OK, EXIT_VERIFY, main

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"
GOLDEN = Path(__file__).parent / "golden"


def write_config(tmp_path, **over):
    cfg = yaml.safe_load((CONFIGS / "two_body_circular.yaml").read_text())
    for k, v in over.items():
        cfg[k] = v
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(cfg))
    return path


def read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


@pytest.mark.parametrize("mode", ["Z", "K", "both"])
def test_simulate_modes(tmp_path, capsys, mode):
    out = tmp_path / "out"
    rc = main(["simulate", "--config", str(CONFIGS / "two_body_circular.yaml"), "--mode", mode,
               "--out", str(out)])
    assert rc == EXIT_OK
    header, rows = read_csv(out / "trajectory.csv")
    assert len(rows) == 51 and header[:4] == ["t", "energy", "L_norm", "casimir_2"]
    assert ("residual" in header) == (mode == "both")
    assert any(h.startswith("K_" if mode == "K" else "Z_") for h in header)
    rep = json.loads((out / "simulate.json").read_text())
    assert rep["mode"] == mode and rep["energy_drift"] <= 1e-8
    assert rep["casimir_drift"][0] <= 1e-8
    if mode == "both":
        assert rep["max_residual"] <= 1e-6
    assert "energy drift" in capsys.readouterr().out


def test_simulate_t_end_zero(tmp_path):
    path = write_config(tmp_path, run={"t_end": 0.0, "samples": 5, "mode": "Z"})
    assert main(["simulate", "--config", str(path), "--out", str(tmp_path / "o")]) == EXIT_OK
    _, rows = read_csv(tmp_path / "o" / "trajectory.csv")
    assert len(rows) == 1 and float(rows[0][0]) == 0.0


def test_simulate_is_byte_deterministic(tmp_path):
    cfg = str(CONFIGS / "three_body_spatial.yaml")
    for tag in ("a", "b"):
        assert main(["simulate", "--config", cfg, "--seed", "3", "--out", str(tmp_path / tag)]) == 0
    for name in ("trajectory.csv", "simulate.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_simulate_collision_exit_code(tmp_path, capsys):
    path = write_config(tmp_path, dimension=1, initial={"positions": [[-0.5], [0.5]],
                                                        "momenta": [[0.0], [0.0]]},
                        run={"t_end": 5.0, "samples": 3, "mode": "Z"})
    assert main(["simulate", "--config", str(path)]) == EXIT_INTEGRATION
    assert "integration failure" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["simulate", "--config", "/nonexistent/run.yaml"],
    ["simulate", "--config", str(CONFIGS / "two_body_circular.yaml"), "--tol", "-1"],
    ["simulate", "--config", str(CONFIGS / "two_body_circular.yaml"), "--mode", "X"],
    ["invariants"],
    ["tables", "5"],
    ["classify", "--m", "2", "--p", "1", "--q", "2", "--omega", "1.0"],
    ["classify", "--m", "2", "--p", "1", "--q", "0"],
    ["verify", "nonsense"],
    ["frobnicate"],
])
def test_input_errors_exit_2(argv):
    try:
        rc = main(argv)
    except SystemExit as exc:
        rc = exc.code
    assert rc == EXIT_INPUT


def test_bad_yaml_exit_2(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("version: 1\nmasses: [1.0, -2.0]\ndimension: 2\n")
    assert main(["simulate", "--config", str(path)]) == EXIT_INPUT


@pytest.mark.parametrize("cfg,pq", [("three_body_spatial.yaml", "(1,1)"),
                                    ("three_body_collinear.yaml", "(0,1)"),
                                    ("two_body_circular.yaml", "(1,0)")])
def test_invariants(tmp_path, capsys, cfg, pq):
    assert main(["invariants", "--config", str(CONFIGS / cfg), "--out", str(tmp_path)]) == EXIT_OK
    text = capsys.readouterr().out
    assert f"(p,q) = {pq}" in text
    rep = json.loads((tmp_path / "invariants.json").read_text())
    assert f"({rep['p']},{rep['q']})" == pq
    # positional state file is accepted as well
    assert main(["invariants", str(CONFIGS / cfg)]) == EXIT_OK


def test_classify(tmp_path, capsys):
    rc = main(["classify", "--m", "2", "--p", "1", "--q", "1", "--omega", "2.5", "--out", str(tmp_path)])
    assert rc == EXIT_OK
    text = capsys.readouterr().out
    assert "dim O = 8" in text and "SO(2) × ℝ" in text and "closure strata = (1,1), (1,0)" in text
    rep = json.loads((tmp_path / "classify.json").read_text())
    assert rep["dimension"] == 8 and rep["closed"] is False


@pytest.mark.parametrize("n", [3, 4])
def test_tables_golden(tmp_path, capsys, n):
    assert main(["tables", str(n), "--out", str(tmp_path)]) == EXIT_OK
    golden = (GOLDEN / f"tables_n{n}.txt").read_bytes()
    assert (tmp_path / f"tables_n{n}.txt").read_bytes() == golden
    assert capsys.readouterr().out.encode() == golden


def test_verify_pass_and_report(tmp_path, capsys):
    rc = main(["verify", "spectral", "--seed", "7", "--trials", "20", "--out", str(tmp_path)])
    assert rc == EXIT_OK
    assert capsys.readouterr().out.startswith("spectral: PASS")
    rep = json.loads((tmp_path / "verify.json").read_text())
    assert rep["suites"][0]["passed"] and rep["seed"] == 7


def test_verify_deterministic(tmp_path):
    for tag in ("a", "b"):
        main(["verify", "all", "--seed", "11", "--trials", "5", "--out", str(tmp_path / tag)])
    assert (tmp_path / "a" / "verify.json").read_bytes() == (tmp_path / "b" / "verify.json").read_bytes()


def test_verify_failure_exit_1(capsys):
    # an impossible tolerance makes at least one trial fail
    rc = main(["verify", "casimir", "--seed", "1", "--trials", "3", "--tol", "1e-30"])
    assert rc == EXIT_VERIFY
    assert "FAIL" in capsys.readouterr().out


def test_verify_workers_match_serial(tmp_path):
    main(["verify", "xu-roundtrip", "--seed", "2", "--trials", "8", "--out", str(tmp_path / "s")])
    main(["verify", "xu-roundtrip", "--seed", "2", "--trials", "8", "--workers", "2",
          "--out", str(tmp_path / "p")])
    assert (tmp_path / "s" / "verify.json").read_bytes() == (tmp_path / "p" / "verify.json").read_bytes()


def test_module_entry_and_log_env():
    cmd = [sys.executable, "-m", "galilax", "tables", "3"]
    quiet = subprocess.run(cmd, capture_output=True, text=True,
                           env={k: v for k, v in os.environ.items() if k != "GALILAX_LOG"})
    loud = subprocess.run(cmd, capture_output=True, text=True, env=dict(os.environ, GALILAX_LOG="info"))
    assert quiet.returncode == loud.returncode == 0
    assert quiet.stderr == "" and "INFO galilax: tables: n=3" in loud.stderr
    # logging goes to stderr only, stdout stays byte-identical to the golden file
    assert quiet.stdout == loud.stdout
    assert loud.stdout.encode() == (GOLDEN / "tables_n3.txt").read_bytes()
    res = subprocess.run([sys.executable, "-m", "galilax", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "galilax" in res.stdout
