import json

import numpy as np
import pytest

from strip_hydro.checkpoint import write_checkpoint
from strip_hydro.cli import cli_main
from strip_hydro.grid import Grid, PhysicalField, forward_transform
from strip_hydro.harness import CONVERGENCE_COLUMNS, NORMS_COLUMNS, read_csv

SHORT = """\
[grid]
nx = 16
ny = 33

[run]
dt = 2e-3
t_end = {t_end}
eps = {eps}
cadence = 5

[initial]
delta = {delta}
k0 = 1
a = 0.5
"""


def write_cfg(tmp_path, t_end=0.05, eps="0.2, 0.1, 0.05", delta=1e-2, name="run.cfg"):
    p = tmp_path / name
    p.write_text(SHORT.format(t_end=t_end, eps=eps, delta=delta))
    return p


def test_missing_config_names_path(capsys):
    assert cli_main(["converge", "--config", "missing.cfg"]) == 1
    assert "missing.cfg" in capsys.readouterr().err


def test_usage_error(capsys):
    assert cli_main(["frobnicate"]) == 1
    assert cli_main([]) == 1
    assert "strip-hydro" in capsys.readouterr().err


def test_unknown_key(tmp_path, capsys):
    p = tmp_path / "bad.cfg"
    p.write_text("[grid]\nnx = 16\ncolour = red\n")
    assert cli_main(["solve-ans", "--config", str(p)]) == 1
    assert "colour" in capsys.readouterr().err


def test_norms_prints_one_row(tmp_path, capsys):
    g = Grid(64, 17)
    f = forward_transform(PhysicalField.from_function(g, lambda x, y: np.exp(np.cos(x)) * np.sin(np.pi * y)))
    write_checkpoint(tmp_path / "f.strp", f)
    assert cli_main(["norms", "--checkpoint", str(tmp_path / "f.strp"), "--s", "0.5"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 1
    assert len(lines[0].split(",")) == len(NORMS_COLUMNS)
    assert float(lines[0].split(",")[1]) == 0.5


def test_norms_missing_checkpoint():
    assert cli_main(["norms", "--checkpoint", "absent.strp"]) == 1


def test_solve_ans_with_checkpoints(tmp_path, capsys):
    cfg = write_cfg(tmp_path)
    out = tmp_path / "o"
    assert cli_main(["solve-ans", "--config", str(cfg), "--checkpoint-every", "10", "--out", str(out)]) == 0
    names = sorted(p.name for p in out.iterdir())
    assert "ans_final.strp" in names and "ans_000010.strp" in names
    assert "divergence=" in capsys.readouterr().out


def test_solve_hydro_writes_decay(tmp_path):
    cfg = write_cfg(tmp_path)
    out = tmp_path / "h"
    assert cli_main(["solve-hydro", "--config", str(cfg), "--out", str(out)]) == 0
    header, rows = read_csv(out / "decay.csv")
    assert header == ["t", "l2", "b_half"]
    assert rows[0][0] == 0.0 and rows[-1][0] == pytest.approx(0.05)


def test_converge_writes_reports(tmp_path, capsys):
    cfg = write_cfg(tmp_path, t_end=0.04)
    out = tmp_path / "c"
    assert cli_main(["converge", "--config", str(cfg), "--out", str(out), "--workers", "1"]) == 0
    header, rows = read_csv(out / "convergence.csv")
    assert tuple(header) == CONVERGENCE_COLUMNS and len(rows) == 3
    summary = json.loads((out / "summary.json").read_text())
    assert summary["alive"] is True and summary["slope"] > 0.9
    assert "slope=" in capsys.readouterr().out


def test_numerical_failure_exit_code(tmp_path, capsys):
    cfg = write_cfg(tmp_path, t_end=0.2, eps="1.0", delta=50.0)
    assert cli_main(["converge", "--config", str(cfg), "--out", str(tmp_path / "x"), "--workers", "1"]) == 2
    assert "numerical failure" in capsys.readouterr().err
