from __future__ import annotations

import csv
import io
import subprocess
import sys

import pytest

from conflictsched.cli import build_parser, config_from_args, main
from conflictsched.harness.report import COLUMNS

FAST = ["--benchmark", "smallbank", "--scale", "0.01", "--phase1-secs", "0.2", "--phase2-secs", "0.5"]


def test_csv_to_stdout(capsys):
    assert main(FAST) == 0
    table = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert tuple(table[0]) == COLUMNS and table[-1][0] == "mean"


def test_out_writes_csv_and_figures(tmp_path, capsys):
    out = tmp_path / "r.csv"
    assert main(FAST + ["--out", str(out), "--reps", "2"]) == 0
    assert capsys.readouterr().out == ""
    assert len(out.read_text().splitlines()) == 4
    assert (tmp_path / "r_summary.png").stat().st_size > 0


@pytest.mark.parametrize("bad", [
    ["--threads", "0"], ["--policy", "count/max"], ["--throttle", "slow"], ["--skew", "zipf"],
    ["--evict", "bogus=1"], ["--warehouses", "0"],
])
def test_configuration_errors_exit_2(bad, capsys):
    assert main(FAST + bad) == 2
    assert "configuration error" in capsys.readouterr().err


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["--benchmark", "ycsb"])
    assert exc.value.code == 2


def test_flags_map_to_config():
    args = build_parser().parse_args(["--cc", "2pl", "--threads", "8", "--skew", "uniform:5,zipf0.5:5",
                                      "--continuous", "--evict", "off", "--throttle", "rt:3"])
    cfg = config_from_args(args)
    assert (cfg.protocol, cfg.threads, cfg.continuous, cfg.duration_seconds) == ("2pl", 8, True, 10)
    assert not cfg.eviction_config.enabled and str(cfg.throttle) == "rt:3"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "conflictsched", *FAST, "--policy", "random"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0 and proc.stdout.startswith("rep,")
