import math

import pytest

import vtoldock


def test_default_config_round_trip():
    cfg = vtoldock.default_config()
    assert cfg["env"]["max_steps"] == 200
    assert cfg["agent"] == "ppo"


def test_spectral_density_at_peak():
    p = vtoldock.default_config()["env"]["wave"]["spectrum"]
    f = p["f_p"]
    expected = (p["alpha_w"] * p["g"] ** 2 / p["k_w"] ** 4 * f ** -5
                * math.exp(-1.25) * p["gamma_w"])
    (got,) = vtoldock.spectral_density([f])
    assert got == pytest.approx(expected, rel=1e-12)


def test_simulate_wave_shape_and_height():
    t, z, zdot = vtoldock.simulate_wave(seed=3, duration=600.0)
    assert len(t) == len(z) == len(zdot) == 60001
    mean = sum(z) / len(z)
    var = sum((x - mean) ** 2 for x in z) / len(z)
    assert 4 * math.sqrt(var) == pytest.approx(0.5, rel=0.15)


def test_free_fall_episode_lands():
    env = vtoldock.LandingEnv(
        {"env": {"uav": {"k_fdz": 0.0}, "wave": {"significant_height": 0.0}}})
    assert env.reset(1) == (5.0, 0.0)
    while not env.done:
        r = env.step(0.0)
    assert r["landed"]
    assert env.time == pytest.approx(math.sqrt(2 * 5 / 9.81), abs=0.01)
    assert r["impact_velocity"] == pytest.approx(9.90, abs=0.1)


def test_invalid_config_raises():
    with pytest.raises(vtoldock.ConfigError, match="masss"):
        vtoldock.LandingEnv({"env": {"uav": {"masss": 2.0}}})
    with pytest.raises(ValueError):
        vtoldock.train({"agent": "sarsa"})


def test_train_evaluate_and_plots(tmp_path):
    cfg = {"agent": "dqn", "episodes": 5, "output_dir": str(tmp_path)}
    out = vtoldock.train(cfg, seed=4)
    assert len(out["rewards"]) == 5
    assert out["critic_weights"] is None
    net = vtoldock.Network.load(out["weights"])
    assert len(net.forward(1.0, -0.5)) == 3
    report = vtoldock.evaluate(out["weights"], cfg, episodes=3)
    assert len(report["episodes"]) == 3
    assert 0.0 <= report["success_rate"] <= 1.0
    assert report["median_inference_ms"] < 1.0
    files = vtoldock.export_plots(tmp_path, tmp_path / "plots")
    assert any(str(f).endswith("reward_dqn_seed4.csv") for f in files)


def test_moving_average():
    mean, std = vtoldock.moving_average([1.0, 2.0, 3.0], 3)
    assert mean[1] == pytest.approx(2.0)
    assert std[1] == pytest.approx(math.sqrt(2 / 3))
