import json

import pytest
from click.testing import CliRunner

from qlmass.cli import main


@pytest.fixture
def run(tmp_path):
    runner = CliRunner()

    def call(*args):
        return runner.invoke(main, ["--out", str(tmp_path)] + list(args), catch_exceptions=False)
    return call


def test_verify_writes_report(run, tmp_path):
    res = run("--set", "family=reissner_nordstrom", "--set", "Q=0.6", "verify", "--theorem", "BY-charge",
              "--theorem", "LY-Penrose")
    assert res.exit_code == 0, res.output
    rep = json.loads((tmp_path / "report.json").read_text())
    assert set(rep) >= {"scenario", "stages", "verdicts", "tolerances"}
    assert [v["theorem"] for v in rep["verdicts"]] == ["BY-charge", "LY-Penrose"]


def test_config_file_and_sweep(run, tmp_path):
    cfg = tmp_path / "c.ini"
    assert run("--set", "Q=0.3", "--set", "theorems=BY-charge", "write-config", str(cfg)).exit_code == 0
    res = run("--config", str(cfg), "sweep", "--range", "Q=0.2,0.4")
    assert res.exit_code == 0, res.output
    rows = json.loads((tmp_path / "sweep.json").read_text())["verdicts"]
    assert len(rows) == 2


def test_surface_and_mass(run, tmp_path):
    assert run("--set", "family=kerr", "--set", "a=0.6", "surface", "--r", "4").exit_code == 0
    assert (tmp_path / "surface.csv").exists()
    assert run("--set", "family=kerr", "--set", "a=0.6", "mass", "--r", "4").exit_code == 0
    rep = json.loads((tmp_path / "mass.json").read_text())
    assert abs(rep["J_BY"] - 0.6) < 1e-8


@pytest.mark.parametrize("verb", ["build-data", "imcf", "jang", "embed", "bekenstein"])
def test_other_verbs(run, tmp_path, verb):
    res = run("--set", "Q=0.6", "--set", "n_radial=60", "--set", "imcf_n=60", verb)
    assert res.exit_code == 0, res.output


def test_bad_arguments(run):
    assert run("--set", "colour=red", "verify").exit_code != 0
    assert run("--tol-scale", "-1", "verify").exit_code != 0
    assert run("--set", "Q=2.0", "verify").exit_code != 0


def test_stage_failure_reported(run):
    res = run("--set", "family=kerr", "--set", "a=0.6", "--set", "n_radial=20", "--set", "polar_order=16",
              "jang")
    assert res.exit_code != 0 and "spherically symmetric" in res.output
