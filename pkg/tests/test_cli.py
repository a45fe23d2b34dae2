import json

import pytest

from chemohapto.cli import main


def test_threshold_flags(capsys):
    assert main(["threshold", "--N", "2", "--mu", "0.5", "--m", "0.9"]) == 0
    out = capsys.readouterr().out
    assert "m_crit=0.847058823529" in out and "admissible=true" in out


def test_threshold_json_and_infinity(capsys):
    assert main(["threshold", "--json", "--mu", "3"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["mu_star"] == "inf" and d["m_crit"] == 0.0


def test_threshold_from_config(tmp_path, capsys):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[grid]\ncells = 32\n[initial]\nw0 = 1 + 0.5*cos(pi*x/Lx)\n")
    assert main(["threshold", "--config", str(cfg)]) == 0
    out = capsys.readouterr().out
    assert "kappa=" in out and "m=2.0" in out


def test_threshold_bad_input_is_config_error(capsys):
    assert main(["threshold", "--chi", "0"]) == 2


def test_simulate_writes_outputs(tmp_path, capsys):
    out = tmp_path / "sim"
    rc = main(["simulate", "--out", str(out), "--deterministic", "--override", "grid.cells=16",
               "--override", "solver.t_end=0.5"])
    assert rc == 0
    assert (out / "manifest.txt").read_text().count("deterministic = true") == 2
    assert "status=completed" in capsys.readouterr().out


@pytest.mark.parametrize("override, code", [("initial.w0=0", 4), ("grid.color=1", 2),
                                            ("grid.cells=abc", 2), ("diffusivity.m=0", 4)])
def test_exit_codes(tmp_path, override, code):
    assert main(["simulate", "--out", str(tmp_path), "--override", override]) == code


def test_missing_config_file(tmp_path):
    assert main(["simulate", "--config", str(tmp_path / "none.ini")]) == 2


def test_solver_abort_exit_code(tmp_path):
    rc = main(["simulate", "--out", str(tmp_path), "--override", "grid.cells=8",
               "--override", "initial.u0=1e12", "--override", "solver.t_end=1"])
    assert rc == 3


def test_sweep_command(tmp_path, capsys):
    cfg = tmp_path / "s.ini"
    cfg.write_text("[grid]\ncells = 16\n[solver]\nt_end = 0.5\n"
                   "[sweep]\nparallel = 1\naxis.diffusivity.m = 1, 2\n")
    out = tmp_path / "sw"
    assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
    assert (out / "results.csv").read_text().count("\n") == 3
    assert (out / "runs" / "run_0000" / "manifest.txt").exists()
    assert "bounded: 2" in capsys.readouterr().out


def test_converge_command(tmp_path, capsys):
    assert main(["converge", "--preset", "heat", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "convergence.csv").exists()
    assert "observed order" in capsys.readouterr().out


def test_verify_command(tmp_path, capsys):
    assert main(["verify", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "24/24 configurations passed" in out
