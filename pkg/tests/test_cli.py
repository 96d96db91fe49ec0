import json
import math
import subprocess
import sys
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest

from circlebody import cli, verify
from circlebody.config import load_config

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

SUTHERLAND = """
[model]
kind = "sutherland"
g = 1.0

[run]
n_particles = 2
t_end = 10.0
n_samples = 101

[initial]
theta = [0.4, 2.1]
theta_dot = [0.6, -0.2]

[output]
prefix = "suth"
"""

MANY_BODY = """
[model]
kind = "many_body"
mu = [{mu1}, 1.7]
eta = [0.4, -0.3]

[run]
n_particles = 2
t_end = 2.0
n_samples = 21

[initial]
theta = [0.3, 1.9]
theta_dot = [0.5, -0.4]

[output]
prefix = "mb"
"""


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv(cli.OUTPUT_DIR_ENV, raising=False)
    return tmp_path


def write(path, text):
    path.write_text(text)
    return path


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_simulate_sutherland_demo(workdir, capsys):
    cfg = write(workdir / "s.toml", SUTHERLAND)
    assert run("simulate", cfg, "--svg") == 0
    out = workdir / "out"
    names = {"suth_trajectory.csv", "suth_invariants.csv", "suth_summary.json", "suth_trajectory.svg"}
    assert {p.name for p in out.iterdir()} == names
    summary = json.loads((out / "suth_summary.json").read_text())
    assert summary["P_drift"] < 1e-8 and summary["E_drift"] < 1e-8
    assert summary["model"] == {"kind": "sutherland", "g": 1.0}
    assert set(summary["files"]) == names
    printed = capsys.readouterr().out.split()
    assert {Path(p).name for p in printed} == names
    ET.parse(out / "suth_trajectory.svg")


def test_trajectory_csv_round_trips_exactly(workdir):
    cfg = write(workdir / "s.toml", SUTHERLAND)
    assert run("simulate", cfg) == 0
    path = workdir / "out" / "suth_trajectory.csv"
    header = path.read_text().splitlines()[0]
    assert header == "t,theta_1,theta_2,theta_dot_1,theta_dot_2"
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape == (101, 5)
    np.testing.assert_array_equal(data[:, 0], load_config(cfg).t_grid)
    np.testing.assert_array_equal(data[0, 1:], [0.4, 2.1, 0.6, -0.2])


def test_outputs_are_deterministic(workdir, monkeypatch):
    cfg = write(workdir / "s.toml", SUTHERLAND)
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(workdir / "a"))
    assert run("simulate", cfg, "--svg") == 0
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(workdir / "b"))
    assert run("simulate", cfg, "--svg") == 0
    for p in (workdir / "a").iterdir():
        assert p.read_bytes() == (workdir / "b" / p.name).read_bytes()


def test_env_var_overrides_directory_and_leaves_no_temp_files(workdir, monkeypatch):
    cfg = write(workdir / "s.toml", SUTHERLAND)
    target = workdir / "elsewhere" / "deep"
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(target))
    assert run("simulate", cfg) == 0
    assert not (workdir / "out").exists()
    assert sorted(p.name for p in target.iterdir()) == [
        "suth_invariants.csv",
        "suth_summary.json",
        "suth_trajectory.csv",
    ]


def test_circle_form_writes_cartesian_columns(workdir):
    cfg = CONFIGS / "two_body_n3.toml"
    assert run("simulate", cfg) == 0
    out = workdir / "out"
    header = (out / "two_body_n3_trajectory.csv").read_text().splitlines()[0]
    assert header.endswith("x_3,y_3")
    summary = json.loads((out / "two_body_n3_summary.json").read_text())
    assert summary["form"] == "circle"
    assert summary["max_radius_error"] < 1e-9


def test_zero_mass_is_a_config_error(workdir, capsys):
    cfg = write(workdir / "bad.toml", MANY_BODY.format(mu1=0.0))
    assert run("simulate", cfg) == 1
    err = capsys.readouterr().err
    assert "model.mu[0]" in err
    assert not (workdir / "out").exists()


def test_collision_exits_2(workdir, capsys):
    cfg = write(workdir / "c.toml", SUTHERLAND.replace("[0.4, 2.1]", "[0.4, 0.4]"))
    assert run("simulate", cfg) == 2
    assert "Collision" in capsys.readouterr().err


def test_tangent_singularity_exits_2(workdir, capsys):
    theta = math.pi / 2 - 1e-12
    text = f"""
[model]
kind = "goldfish_tan"

[run]
n_particles = 2
t_end = 1.0
n_samples = 5

[initial]
theta = [{theta!r}, 0.3]
theta_dot = [0.0, 0.1]
"""
    cfg = write(workdir / "t.toml", text)
    assert run("simulate", cfg) == 2
    assert "TangentSingularity" in capsys.readouterr().err


def test_compare_many_body_three_ways(workdir):
    cfg = write(workdir / "m.toml", MANY_BODY.format(mu1=1.0))
    assert run("compare", cfg, "--svg") == 0
    report = json.loads((workdir / "out" / "mb_compare.json").read_text())
    assert report["methods"] == ["angle", "circle", "algebraic"]
    assert set(report["max_deviation"]) == {"angle_vs_circle", "angle_vs_algebraic", "circle_vs_algebraic"}
    assert report["worst_deviation"] < 1e-6
    header = (workdir / "out" / "mb_compare.csv").read_text().splitlines()[0]
    assert "algebraic_theta_2" in header and "dev_circle_algebraic" in header
    ET.parse(workdir / "out" / "mb_compare.svg")


def test_compare_two_body_two_ways(workdir):
    assert run("compare", CONFIGS / "two_body_n3.toml") == 0
    report = json.loads((workdir / "out" / "two_body_n3_compare.json").read_text())
    assert report["methods"] == ["angle", "circle"]
    assert report["worst_deviation"] < 1e-7
    assert "algebraic" not in (workdir / "out" / "two_body_n3_compare.csv").read_text().splitlines()[0]


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("[model\nkind = 1", "line"),
        (SUTHERLAND.replace("g = 1.0", "g = 1.0\ncolour = 3"), "colour"),
        (SUTHERLAND.replace("n_samples = 101", "n_samples = 1"), "run.n_samples"),
        (SUTHERLAND.replace('"sutherland"', '"pendulum"'), "model.kind"),
    ],
    ids=["syntax", "unknown-key", "few-samples", "unknown-kind"],
)
def test_bad_configs_exit_1(workdir, capsys, text, fragment):
    cfg = write(workdir / "x.toml", text)
    assert run("simulate", cfg) == 1
    assert fragment in capsys.readouterr().err


def test_missing_config_file_exits_1(workdir):
    assert run("simulate", workdir / "nope.toml") == 1


@pytest.mark.parametrize("argv", [[], ["explode"], ["verify", "no_such_suite"], ["simulate"]])
def test_usage_errors_exit_1(argv):
    with pytest.raises(SystemExit) as info:
        cli.main(argv)
    assert info.value.code == 1


@pytest.mark.parametrize("suite", ["interp", "identities", "algebraic"])
def test_fast_verify_suites_pass(suite, capsys):
    assert run("verify", suite) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[-1].startswith(f"verify {suite}: all")
    assert all(line.startswith("PASS") for line in out[:-1])


def test_failing_check_exits_3(monkeypatch, capsys):
    monkeypatch.setitem(verify.SUITES, "interp", lambda seed: [verify.Check("always_bad", 1.0, 0.5)])
    assert run("verify", "interp") == 3
    captured = capsys.readouterr()
    assert "FAIL always_bad" in captured.out
    assert "first failing check: always_bad" in captured.err


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.toml")), ids=lambda p: p.stem)
def test_shipped_configs_parse(path):
    cfg = load_config(path)
    assert cfg.t_grid[0] == 0.0 and cfg.n_samples >= 2


def test_module_entry_point(tmp_path):
    env_cfg = write(tmp_path / "s.toml", SUTHERLAND.replace("t_end = 10.0", "t_end = 1.0"))
    proc = subprocess.run(
        [sys.executable, "-m", "circlebody", "simulate", str(env_cfg)],
        cwd=tmp_path,
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "out" / "suth_summary.json").exists()
