import csv
import subprocess
import sys

import pytest

from nomacim.cli import main


def run(tmp_path, *args):
    return main(["--out", str(tmp_path), *args])


def test_gen_then_solve(tmp_path):
    assert run(tmp_path, "--seed", "3", "gen", "--users", "8") == 0
    assert (tmp_path / "scenario.txt").exists()
    assert run(tmp_path, "--methods", "cnoma,random", "solve",
               "--scenario", str(tmp_path / "scenario.txt")) == 0
    rows = list(csv.DictReader(open(tmp_path / "solve.csv")))
    assert [r["method"] for r in rows] == ["cnoma", "random"]


def test_global_flags_after_subcommand(tmp_path):
    assert main(["solve", "--out", str(tmp_path), "--methods", "cnoma", "--users", "6"]) == 0
    assert (tmp_path / "solve.csv").exists()


def test_sweep_with_alpha_panels(tmp_path):
    assert run(tmp_path, "--trials", "1", "--methods", "cnoma", "sweep", "--kind", "channels",
               "--values", "6,7", "--alpha", "3,4") == 0
    assert (tmp_path / "sweep_channels_alpha3.csv").exists()
    assert (tmp_path / "sweep_channels_alpha4.csv").exists()


def test_timing_and_trace(tmp_path):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("num_cycles = 50\n# comment\nnum_sweeps=20\n")
    assert run(tmp_path, "--config", str(cfg), "--methods", "cim,sa", "timing",
               "--users", "6,8") == 0
    rows = list(csv.DictReader(open(tmp_path / "timing.csv")))
    assert {r["work"] for r in rows if r["method"] == "cim"} == {"50"}
    assert run(tmp_path, "--config", str(cfg), "trace", "--users", "4") == 0
    assert sum(1 for _ in open(tmp_path / "trace.csv")) == 52


def test_mobility_command(tmp_path):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("num_channels=2\nnum_cycles=50\n")
    assert run(tmp_path, "--config", str(cfg), "mobility", "--users", "4",
               "--intervals", "4", "--latencies", "0.005,0.04") == 0
    rows = list(csv.DictReader(open(tmp_path / "mobility.csv")))
    assert len(rows) == 4 + 2


def test_exit_code_infeasible_qos(tmp_path):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("total_power_w=1e-9\n")
    assert run(tmp_path, "--config", str(cfg), "--methods", "cnoma", "solve") == 2


def test_exit_code_too_large(tmp_path):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("num_channels=8\n")
    assert run(tmp_path, "--config", str(cfg), "--methods", "es", "solve", "--users", "16") == 3


def test_usage_error_and_unknown_method(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 1
    assert run(tmp_path, "--methods", "dqn", "solve") == 1


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "nomacim", "--out", str(tmp_path), "gen"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and "scenario.txt" in out.stdout
