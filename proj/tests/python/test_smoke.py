import math

import numpy as np
import pytest

import surge_al as sa


def test_surge_distance_values():
    assert abs(sa.surge_distance(0.076 * 2.93, 1000.0)) < 1e-12
    assert abs(sa.surge_distance(0.152 * 2.93, 1000.0) - 100.0) < 1e-12
    assert sa.surge_distance(0.0, 1000.0) == -100.0
    assert sa.flow_coefficient(2.93, 1000.0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        sa.surge_distance(1.0, 0.0)


def test_generate_is_deterministic():
    a = sa.generate(200, seed=3)
    b = sa.generate(200, seed=3)
    assert len(a) == 200
    assert [s.sd for s in a] == [s.sd for s in b]
    x, y = sa.to_arrays(a)
    assert x.shape == (200, 5)
    assert y.shape == (200,)


def test_metrics():
    truth = [10, -20, 0.5, 40, 5]
    pred = [11, -18, 0, 41.2, 5]
    r = sa.metrics_report(pred, truth)
    assert r.rmse == pytest.approx(math.sqrt(6.69 / 5), abs=1e-12)
    assert r.r2 == pytest.approx(279 / 280, abs=1e-12)
    assert r.mape_pct == pytest.approx(14.6, abs=1e-12)
    assert r.acceptance_accuracy_pct == pytest.approx(40.0)
    assert sa.acceptance_accuracy([103, 110], [100, 100], 4.0) == 50.0
    with pytest.raises(ValueError):
        sa.rmse([1.0], [1.0, 2.0])


def test_forward_and_nll():
    arch = sa.Architecture()
    arch.hidden_dims = [8, 8]
    params = sa.init_network(arch, 1)
    mean, var = sa.forward(params, np.zeros((3, 5)))
    assert mean.shape == (3,)
    assert np.all(var > 0)
    assert np.all(np.abs(mean) < arch.tanh_scale)
    assert sa.gaussian_nll(0.0, 1.0, 0.0) == 0.0


def test_ensemble_pooling_and_training():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(64, 5))
    y = x[:, 0] - 0.5 * x[:, 1]
    arch = sa.Architecture()
    arch.hidden_dims = [16, 16]
    config = sa.TrainConfig()
    config.epochs = 30
    config.batch_size = 16
    ens = sa.train_ensemble(x, y, config, 3, arch)
    assert ens.size == 3
    mean, var = sa.predict_pooled(ens, x)
    assert mean.shape == (64,)
    assert np.all(var > 0)
    again = sa.train_ensemble(x, y, config, 3, arch)
    assert np.array_equal(mean, sa.predict_pooled(again, x)[0])


def test_active_learning_loops():
    samples = sa.generate(300, seed=1)
    config = sa.ALConfig()
    config.initial_train_size = 20
    config.batch_k = 10
    config.candidate_multiplier = 3
    config.iterations = 2
    config.n_members = 2
    config.arch.hidden_dims = [8]
    config.train_config.epochs = 3
    al = sa.al_loop(samples, config)
    rnd = sa.random_baseline_loop(samples, config)
    assert [r.train_size for r in al.records] == [20, 30, 40]
    assert al.records[0].test_rmse == rnd.records[0].test_rmse
    assert len(al.predict_sd(samples[:5])) == 5
    train, pool, test = set(al.state.train_idx), set(al.state.pool_idx), set(al.state.test_idx)
    assert not (train & pool) and not (train & test) and not (pool & test)
    config.iterations = 1000
    with pytest.raises(ValueError):
        sa.al_loop(samples, config)
