import numpy as np
import pytest
import yaml

from qnsp.cli import main
from qnsp.errors import SchemaError
from qnsp.fields import ScalarField, VectorField
from qnsp.grid import make_grid
from qnsp.hierarchy import build_profiles
from qnsp.initial import taylor_green_velocity
from qnsp.params import PhysParams
from qnsp.persist import (
    load_profiles,
    read_checkpoint,
    save_profiles,
    write_checkpoint,
)
from qnsp.state import FluidState

from conftest import rel_l2, smooth_scalar

PARAMS = PhysParams(eps=0.05, hbar=0.05, mu=0.1, lam=0.0, kappa=0.1, order=1)


def test_checkpoint_round_trip(tmp_path, rng):
    g = make_grid(2, 16)
    n = smooth_scalar(g, rng, kmax=3, amplitude=0.05, mean=1.0)
    u = VectorField((smooth_scalar(g, rng, kmax=3), smooth_scalar(g, rng, kmax=3)))
    T = smooth_scalar(g, rng, kmax=3, amplitude=0.1, mean=1.0)
    state = FluidState.build(0.375, n, u, T, PARAMS.eps)
    write_checkpoint(tmp_path, state, PARAMS, "imex_cn")
    back, params, scheme = read_checkpoint(tmp_path)
    assert scheme == "imex_cn"
    assert params == PARAMS
    assert back.t == 0.375
    assert rel_l2(back.n.values, state.n.values) <= 1e-14
    assert rel_l2(back.u[1].values, state.u[1].values) <= 1e-13
    assert rel_l2(back.phi.values, state.phi.values) <= 1e-12


def test_checkpoint_missing_manifest(tmp_path):
    with pytest.raises(SchemaError):
        read_checkpoint(tmp_path)


def test_profiles_round_trip(tmp_path):
    g = make_grid(2, 16)
    u0 = taylor_green_velocity(g)
    T0 = ScalarField.constant(g, 1.0)
    pset = build_profiles(u0, T0, 1, 0.04, PARAMS, dt=2e-3, cadence=1e-2)
    save_profiles(tmp_path, pset)
    back = load_profiles(tmp_path)
    assert back.order == 1
    assert np.allclose(back.times, pset.times)
    for t in (0.0, 0.03):
        a = pset.compose(0.02, t)
        b = back.compose(0.02, t)
        assert rel_l2(b.n.values, a.n.values) <= 1e-12
        assert rel_l2(b.u[0].values, a.u[0].values) <= 1e-12
        assert rel_l2(b.phi.values, a.phi.values) <= 1e-12


BASE_CONFIG = {
    "grid": {"dim": 2, "points": 16},
    "physics": {"hbar": 0.05, "mu": 0.1, "lam": 0.0, "kappa": 0.1},
    "run": {
        "eps": 0.04,
        "order": 1,
        "tau": 0.04,
        "dt": 2.0e-3,
        "scheme": "rk4_explicit",
        "cadence": 1.0e-2,
    },
    "initial": {"kind": "taylor_green", "amplitude": 1.0, "t_mean": 1.0},
    "ladder": {"eps_values": [4.0e-2, 2.0e-2, 1.0e-2]},
}


def write_config(tmp_path, extra=None):
    cfg = dict(BASE_CONFIG)
    if extra:
        cfg = {**cfg, **extra}
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump(cfg))
    return path


def test_cli_simulate(tmp_path, capsys):
    cfg = write_config(tmp_path)
    out = tmp_path / "sim"
    assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
    assert (out / "manifest.json").exists()
    assert (out / "diagnostics.csv").exists()
    text = capsys.readouterr().out
    assert "mass drift" in text


def test_cli_profiles_and_reload(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "prof"
    assert main(["profiles", "--config", str(cfg), "--order", "1", "--out", str(out)]) == 0
    pset = load_profiles(out)
    assert pset.order == 1


def test_cli_ladder_and_report(tmp_path, capsys):
    cfg = write_config(tmp_path)
    out = tmp_path / "ladder"
    assert main(["ladder", "--config", str(cfg), "--out", str(out)]) == 0
    assert (out / "run_record.json").exists()
    assert "joint slope" in capsys.readouterr().out
    re_out = tmp_path / "again"
    rc = main(["report", "--record", str(out / "run_record.json"), "--out", str(re_out)])
    assert rc == 0
    assert (re_out / "ladder_summary.csv").read_text() == (out / "ladder_summary.csv").read_text()


def test_cli_check(capsys):
    assert main(["check"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out
