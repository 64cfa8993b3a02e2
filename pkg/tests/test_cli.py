import json
import subprocess
import sys

import pytest

from trapwave import cli
from trapwave import io as tio


def run(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "trapwave", *args], capture_output=True, text=True, cwd=cwd)


def test_shoot_outputs_and_reproducibility(tmp_path):
    outs = []
    for _ in range(2):
        proc = run("shoot", "--kind", "gp", "--d", "3", "--b", "0.5", "--out", str(tmp_path / "same"),
                   "--reproducible")
        assert proc.returncode == 0, proc.stderr
        outs.append((tmp_path / "same" / "profile.csv").read_bytes())
    assert outs[0] == outs[1]
    man = json.loads((tmp_path / "same" / "manifest.json").read_text())
    assert set(man["files"]) >= {"profile.csv", "bisection.csv"}
    assert man["results"]["omega"] == pytest.approx(2.913421919823281, abs=1e-9)


def test_coeffs_with_oracle(tmp_path):
    proc = run("coeffs", "--d", "4", "--nmax", "3", "--check-oracle", "5", "--out", str(tmp_path))
    assert proc.returncode == 0, proc.stderr
    rep = json.loads(proc.stdout)
    assert rep["S0000"] == 0.5 and rep["oracle_max_rel_dev"] < 1e-10


def test_resonant_two_mode(tmp_path):
    proc = run("resonant", "--d", "4", "--N", "16", "--periods", "1", "--out", str(tmp_path))
    assert proc.returncode == 0, proc.stderr
    rep = json.loads(proc.stdout)
    assert rep["measured_period"] == pytest.approx(rep["predicted_period"], rel=1e-6)
    cols, data = tio.read_csv(tmp_path / "conserved.csv")
    assert "H" in cols


def test_config_file_then_flag_precedence(tmp_path):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text("kind = gp\nd = 5\nb = 0.5\n")
    proc = run("shoot", "--config", str(cfgfile), "--b", "0.2", "--out", str(tmp_path / "o"))
    assert proc.returncode == 0, proc.stderr
    man = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert man["config"]["b"] == 0.2 and man["config"]["d"] == 5.0 and man["config"]["kind"] == "gp"


@pytest.mark.parametrize("args, code", [
    (["shoot", "--d", "abc"], 2),
    (["shoot", "--kind", "snh", "--d", "7", "--b", "1", "--bracket", "7.5", "8"], 3),
    (["shoot", "--kind", "snh", "--d", "2", "--b", "1"], 2),
])
def test_exit_codes(tmp_path, args, code):
    proc = run(*args, "--out", str(tmp_path / "o"))
    assert proc.returncode == code, proc.stderr


def test_unwritable_output_dir():
    assert run("coeffs", "--d", "4", "--nmax", "1", "--out", "/proc/forbidden/x").returncode == 4


def test_main_in_process(tmp_path, capsys):
    assert cli.main(["coeffs", "--d", "5", "--nmax", "2", "--out", str(tmp_path)]) == 0
    assert "S0000" in capsys.readouterr().out
