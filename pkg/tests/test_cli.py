import csv
import json
import os
import subprocess
import sys

import pytest

from gphelix.cli import main


def run(tmp_path, *args):
    return main(list(args) + ["--out", str(tmp_path)])


def test_profile_writes_files(tmp_path, capsys):
    assert run(tmp_path, "profile", "--rcut", "40", "--tol", "1e-10", "--check-tail") == 0
    out = capsys.readouterr().out
    assert "r^4" in out
    assert (tmp_path / "profile.csv").exists()
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["schema_version"] == 1 and summary["residual"] < 1e-8
    assert set(summary["tail_law"]) == {"10.0", "20.0", "40.0"}
    assert json.loads((tmp_path / "config.json").read_text())["rcut"] == 40.0


def test_profile_precondition(tmp_path):
    assert run(tmp_path, "profile", "--rcut", "2") == 2


def test_unknown_flag(tmp_path):
    with pytest.raises(SystemExit) as info:
        run(tmp_path, "error", "--bogus")
    assert info.value.code == 2


def test_error_scaling_csv(tmp_path):
    assert run(tmp_path, "error", "--n", "2", "--c", "0", "--eps", "1e-3,1e-4", "--points", "4") == 0
    rows = list(csv.DictReader((tmp_path / "scaling.csv").open()))
    assert [float(r["eps"]) for r in rows] == [1e-3, 1e-4]
    assert all(float(r["ratio"]) > 0 for r in rows)


def test_error_oracle_only(tmp_path):
    assert run(tmp_path, "error", "--eps", "1e-2", "--oracle-only", "--points", "3") == 0
    header = next(csv.reader((tmp_path / "comparison.csv").open()))
    assert "Re_Ea" not in header and "Re_Sa_fd" in header
    assert not (tmp_path / "scaling.csv").exists()


def test_error_bad_config(tmp_path):
    assert run(tmp_path, "error", "--eps", "0.5") == 2


def test_reduce_root(tmp_path, capsys):
    assert run(tmp_path, "reduce", "--n", "2", "--c", "0", "--eps", "1e-4", "--bracket", "0.5,2") == 0
    rows = list(csv.DictReader((tmp_path / "sweep.csv").open()))
    assert abs(float(rows[0]["root"]) - 1) < 0.15


def test_reduce_central(tmp_path):
    assert run(tmp_path, "reduce", "--theorem", "2", "--nplus", "5", "--c", "0") == 0
    rows = list(csv.DictReader((tmp_path / "sweep.csv").open()))
    assert abs(float(rows[0]["root"]) - 2**0.5) < 0.15 * 2**0.5


def test_reduce_no_sign_change(tmp_path, capsys):
    assert run(tmp_path, "reduce", "--eps", "1e-4", "--bracket", "1.5,2") == 3
    assert "balance(lo)" in capsys.readouterr().out


@pytest.mark.parametrize(
    "args",
    [
        ["kmd", "--family", "polygon", "--n", "3", "--nu", "0.2", "--verify"],
        ["kmd", "--family", "central-minus", "--N", "5", "--nu", "0", "--verify"],
    ],
)
def test_kmd_verify(tmp_path, args):
    assert run(tmp_path, *args) == 0
    assert json.loads((tmp_path / "verify.json").read_text())["residual"] < 1e-10


def test_kmd_perturb_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["kmd", "--perturb", "1e-3", "--T", "0.2", "--seed", "4", "--out", str(d)]) == 0
    assert (a / "trajectory.csv").read_text() == (b / "trajectory.csv").read_text()
    rep = json.loads((a / "report.json").read_text())
    assert rep["growth_factor"] is not None


def test_output_dir_from_environment(tmp_path):
    env = dict(os.environ, GPHELIX_OUTPUT_DIR=str(tmp_path))
    res = subprocess.run(
        [sys.executable, "-m", "gphelix.cli", "kmd", "--verify", "--n", "2"], env=env, capture_output=True, text=True
    )
    assert res.returncode == 0, res.stderr
    assert (tmp_path / "kmd" / "verify.json").exists()
