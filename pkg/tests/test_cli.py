import json
import subprocess
import sys

import pytest

from loradeploy import configfile
from loradeploy.cli import main
from loradeploy.model import NetworkConfig


def run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path)])


def read_csv(path):
    lines = path.read_text().splitlines()
    comments = [l for l in lines if l.startswith("#")]
    body = [l for l in lines if not l.startswith("#")]
    return comments, body


def test_rings(tmp_path, capsys):
    assert run(tmp_path, "rings") == 0
    comments, body = read_csv(tmp_path / "rings.csv")
    assert any(c.startswith("# config: ") for c in comments)
    assert "# seed: 0" in comments
    assert body[0].startswith("n,sf,q_db")
    assert len(body) == 7
    assert "10.773" in capsys.readouterr().out


def test_collision_linear_constant(tmp_path):
    assert run(tmp_path, "collision", "--spread", "linear:80", "--trials", "2000") == 0
    _, body = read_csv(tmp_path / "collision.csv")
    p = {row.split(",")[4] for row in body[1:]}
    assert len(p) == 1


def test_coverage_and_meta(tmp_path):
    assert run(tmp_path, "coverage") == 0
    cov = json.loads((tmp_path / "coverage.json").read_text())
    assert 0 < cov["C"] < 1 and len(cov["C_n"]) == 6
    assert run(tmp_path, "meta", "--points", "11") == 0
    _, body = read_csv(tmp_path / "meta_curve.csv")
    assert body[0] == "kappa,scope,z,ccdf"
    assert len(body) == 1 + 7 * 11


def test_coverage_sweep(tmp_path):
    assert run(tmp_path, "coverage", "--sweep", "--resolution", "3") == 0
    _, body = read_csv(tmp_path / "coverage_sweep.csv")
    assert len(body) == 10


def test_profile(tmp_path):
    assert run(tmp_path, "profile", "--points", "10") == 0
    _, body = read_csv(tmp_path / "profile.csv")
    assert len(body) == 1 + 9 * 10


def test_deploy_seed_echo(tmp_path):
    assert run(tmp_path, "deploy", "--seed", "7") == 0
    comments, body = read_csv(tmp_path / "deploy.csv")
    assert "# seed: 7" in comments
    first = (tmp_path / "deploy.csv").read_text()
    run(tmp_path, "deploy", "--seed", "7")
    assert (tmp_path / "deploy.csv").read_text() == first


def test_optimize_small(tmp_path):
    assert run(tmp_path, "optimize", "--resolution", "5") == 0
    summary = json.loads((tmp_path / "optimize.json").read_text())
    assert summary["grid"] == [5, 5]


def test_simulate_small(tmp_path):
    assert run(tmp_path, "simulate", "--trials", "500") == 0
    report = json.loads((tmp_path / "simulate.json").read_text())
    assert report["trials"] == 500


def test_bad_input(tmp_path, capsys):
    assert run(tmp_path, "rings", "--set", "eta=1") == 2
    assert run(tmp_path, "rings", "--set", "nonsense=1") == 2
    assert "error" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["bogus"])


def test_dump_config_round_trip(tmp_path):
    path = tmp_path / "cfg.txt"
    assert run(tmp_path, "rings", "--dump-config", str(path), "--set", "eta=3.1", "--spread", "quadratic:0.145") == 0
    cfg = configfile.load(path)
    assert cfg == NetworkConfig(eta=3.1, spread="quadratic:0.145")
    assert configfile.dumps(cfg) == path.read_text()


def test_config_from_environment(tmp_path, monkeypatch):
    path = tmp_path / "env.txt"
    path.write_text("# comment\nlambda0 = 0.5\n\nkappa = -0.01  # inline\n")
    monkeypatch.setenv(configfile.ENV_VAR, str(path))
    cfg = configfile.resolve(None, ["u=120"])
    assert (cfg.lambda0, cfg.kappa, cfg.u) == (0.5, -0.01, 120.0)


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "loradeploy", "rings", "--out", str(tmp_path)], capture_output=True, text=True)
    assert out.returncode == 0 and "SF" in out.stdout
