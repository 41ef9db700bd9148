import subprocess
import sys

import numpy as np

from gradfiber import checks, cli
from gradfiber.checks import CheckResult
from gradfiber.io import read_trace


def test_run_writes_outputs(config_file, tmp_path, capsys):
    out = tmp_path / "out"
    code = cli.main(["run", str(config_file()), "--output-dir", str(out), "--steps", "2"])
    assert code == 0
    tr = read_trace(out / "run.csv")
    assert np.allclose(tr["t"], [0.0, 0.15, 0.3])
    assert (out / "events.log").exists() and (out / "config_used.cfg").exists()
    assert len(list(out.glob("fields_*.vtu"))) == 3
    assert "tension_uni" in capsys.readouterr().out


def test_dt_flag(config_file, tmp_path):
    out = tmp_path / "out"
    assert cli.main(["run", str(config_file()), "--output-dir", str(out), "--dt", "0.3"]) == 0
    assert len(read_trace(out / "run.csv")["t"]) == 2


def test_config_error_exit_code(config_file, tmp_path, capsys):
    assert cli.main(["run", str(config_file(matrix__mu="squishy")), "--output-dir", str(tmp_path)]) == 2
    assert "config error" in capsys.readouterr().err
    assert cli.main(["run", str(tmp_path / "missing.cfg")]) == 2


def test_solver_error_exit_code(config_file, tmp_path, capsys):
    path = config_file(solver__max_newton="1", solver__max_cuts="0", solver__rtol="1e-14",
                       loading__u_max="3 mm", loading__rate="10 mm/s")
    assert cli.main(["run", str(path), "--output-dir", str(tmp_path / "o"), "--steps", "1"]) == 3
    assert "solver failure" in capsys.readouterr().err


def test_acceptance_exit_code(monkeypatch, capsys):
    monkeypatch.setitem(checks.CHECKS, "gtn", lambda seed=0: CheckResult("fake", False, "always red"))
    assert cli.main(["bench", "gtn"]) == 4
    assert capsys.readouterr().out.startswith("[FAIL]")
    monkeypatch.setitem(checks.CHECKS, "gtn", lambda seed=0: CheckResult("fake", True, "green"))
    assert cli.main(["bench", "gtn"]) == 0


def test_bench_in_plane_bending(capsys):
    assert cli.main(["bench", "in_plane_bending"]) == 0
    assert "[PASS]" in capsys.readouterr().out


def test_console_script_help():
    out = subprocess.run([sys.executable, "-m", "gradfiber.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    for word in ("run", "verify", "bench"):
        assert word in out.stdout


def test_single_threaded_runs_are_bitwise_identical(config_file, tmp_path):
    path = config_file(loading__rate="20 mm/s", loading__u_max="4 mm")
    for name in ("a", "b"):
        assert cli.main(["run", str(path), "--output-dir", str(tmp_path / name), "--threads", "1",
                         "--steps", "4"]) == 0
    assert (tmp_path / "a" / "run.csv").read_bytes() == (tmp_path / "b" / "run.csv").read_bytes()
