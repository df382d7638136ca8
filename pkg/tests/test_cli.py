import json
import math

import pytest

from heatcut.cli import ConfigError, ExperimentConfig, main


def run(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_kernel_eval(capsys):
    code, out, _ = run(capsys, "kernel", "eval", "--model", '{"model": "circle", "radius": 1}',
                       "--t", "0.5", "--x", "0", "--y", "0")
    assert code == 0
    rec = json.loads(out)
    assert rec["value"] == pytest.approx(0.564190, abs=5e-7)
    assert set(rec) >= {"t", "value", "error_bound"}


def test_cut_map_labels(capsys):
    code, out, _ = run(capsys, "cut", "map", "--x", "0,0", "--count", "360")
    assert code == 0
    rows = [line.split(",") for line in out.strip().splitlines()]
    assert rows[0] == ["theta", "d_theta", "label", "n_associates"]
    r_angles = [float(r[0]) for r in rows[1:] if r[2] == "R"]
    assert r_angles == pytest.approx([k * math.pi / 4 for k in (1, 3, 5, 7)])


def test_outputs_are_deterministic(tmp_path, capsys):
    outs = []
    for k in range(2):
        path = tmp_path / f"rho{k}.csv"
        assert main(["--output", str(path), "cut", "rho", "--x", "0,0", "--A", "1,0.5", "--count", "16"]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    header = outs[0].decode().splitlines()[0]
    assert header == "theta,rho,psi,psi_tilde,phi,F"


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"model": {"model": "torus", "periods": [6.283185307179586] * 2},
                               "x": [0, 0], "y": [3.141592653589793, 0], "A": [1, 0], "t_grid": [0.05]}))
    code, out, _ = run(capsys, "--config", str(cfg), "repr", "check-hess")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "t,lhs,rhs,residual"
    t, lhs, rhs, res = map(float, lines[1].split(","))
    assert res < 1e-3 * abs(lhs)
    code, out, _ = run(capsys, "--config", str(cfg), "energy", "sweep", "--t-grid", "0.04,0.02")
    assert code == 0 and len(out.strip().splitlines()) == 3


def test_laplace_commands(capsys):
    code, out, _ = run(capsys, "laplace", "diagram", "--points", "[[2,2],[6,0],[0,6]]")
    rec = json.loads(out)
    assert (rec["alpha"], rec["m"]) == ("1/2", 1)
    code, out, _ = run(capsys, "laplace", "diagram", "--points", "[[2,0],[0,2]]")
    rec = json.loads(out)
    assert rec["alpha"] == "1/1" and rec["c"] == pytest.approx(math.pi)
    code, out, _ = run(capsys, "laplace", "expand", "--exponents", "1", "--t", "0.01", "--order", "1")
    assert json.loads(out)["value"] == pytest.approx(math.sqrt(math.pi * 0.01))


def test_mu_show_and_classify(capsys):
    code, out, _ = run(capsys, "mu", "show", "--x", "0,0", "--y", "3.141592653589793,0", "--t", "0.02")
    rec = json.loads(out)
    assert rec["mass_by_midpoint"]["0"] == pytest.approx(0.5)
    code, out, _ = run(capsys, "cut", "classify-pair", "--x", "0,0", "--y", "3.141592653589793,1")
    assert json.loads(out)["verdict"] == "cut"


def test_config_errors(capsys):
    code, _, err = run(capsys, "kernel", "eval", "--t", "-1", "--x", "0,0", "--y", "1,1")
    assert code == 2 and "t: must be positive" in err
    code, _, err = run(capsys, "cut", "classify-pair", "--x", "0,0", "--y", "1,1", "--t-grid", "0.01,0.02")
    assert code == 2 and "strictly decreasing" in err
    code, _, err = run(capsys, "mu", "show", "--x", "0,0", "--y", "1,1", "--nodes", "5")
    assert code == 2 and "nodes" in err
    with pytest.raises(ConfigError, match="model"):
        ExperimentConfig(model={"model": "cone"}).validate()


def test_verify_subset(tmp_path, capsys):
    path = tmp_path / "summary.json"
    code = main(["--output", str(path), "verify", "all", "--only", "5,6"])
    assert code == 0
    rec = json.loads(path.read_text())
    assert rec["failed"] == [] and rec["passed"] == 2
