import numpy as np
import pytest

import asnn

SMALL = {"simulation": {"nx": 30, "steps": 60, "pocket_start_m": 1500}}


def kmh(v):
    return v / 3.6


def test_single_observation_gives_constant_field():
    g = asnn.Grid(0.0, 100.0, 5, 0.0, 5.0, 4)
    p = asnn.AsmParams.typical(200.0, 10.0)
    z = asnn.asm_estimate(g, np.array([120.0]), np.array([7.0]), np.array([20.0]), p)
    assert z.shape == (5, 4)
    np.testing.assert_allclose(z, 20.0, rtol=0, atol=1e-12)


def test_estimate_is_bounded_by_the_data():
    rng = np.random.default_rng(3)
    g = asnn.Grid(0.0, 50.0, 20, 0.0, 2.0, 30)
    x, t = rng.uniform(0, 1000, 40), rng.uniform(0, 60, 40)
    v = rng.uniform(kmh(5), kmh(110), 40)
    z = asnn.asm_estimate(g, x, t, v, asnn.AsmParams.typical(250.0, 5.0))
    assert v.min() - 1e-9 <= z.min() and z.max() <= v.max() + 1e-9


def test_simulate_sample_train_pipeline():
    grid, speed, density = asnn.simulate(SMALL)
    assert speed.shape == (grid.nx, grid.nt) == (30, 61)
    assert asnn.physics_residual(speed, grid, SMALL) <= 1e-10
    x, t, v = asnn.sample_detectors(speed, grid, SMALL)
    assert len(x) == 4 * len(set(t.tolist()))
    cfg = dict(SMALL, train={"max_epochs": 5})
    res = asnn.train(grid, x, t, v, cfg)
    hist = res["cost_history"]
    assert all(b <= a for a, b in zip(hist, hist[1:]))
    assert res["estimate"].shape == speed.shape
    assert 0.0 < asnn.relative_error(res["estimate"], speed) < 1.0


def test_ensemble_weights_are_a_distribution():
    grid, speed, _ = asnn.simulate(SMALL)
    x, t, v = asnn.sample_detectors(speed, grid, SMALL)
    res = asnn.train_ensemble(grid, x, t, v, dict(SMALL, ensemble={"max_epochs": 2}))
    w = np.array(res["weights"])
    assert len(w) == 5 and abs(w.sum() - 1.0) < 1e-12 and (w >= 0).all()


def test_config_validation_and_errors():
    assert asnn.default_config()["cost"]["lambda"] == 0.01
    with pytest.raises(asnn.ConfigError):
        asnn.resolve_config({"cost": {"lambdaa": 1}})
    with pytest.raises(asnn.AsnnError):
        asnn.AsmParams(kmh(80), kmh(15), kmh(60), kmh(20), 100.0, 5.0)
    with pytest.raises(asnn.ShapeError):
        asnn.relative_error(np.zeros((2, 3)), np.ones((3, 2)))


def test_cli_in_process(tmp_path):
    code, out, err = asnn.cli(["simulate", "--set", "simulation.steps=5", "-o", str(tmp_path)])
    assert code == 0, err
    assert (tmp_path / "truth.csv").exists() and (tmp_path / "manifest.json").exists()
    code, _, err = asnn.cli(["nope"])
    assert code == 2 and '"kind":"usage"' in err
