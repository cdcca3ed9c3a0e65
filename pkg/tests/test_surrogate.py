import numpy as np
import pytest

from gbm_laplace.ilt import query_points
from gbm_laplace.processes import GbmParams, TimeGrid, Trajectory, sample_gbm_exact
from gbm_laplace.rng import SeededRng
from gbm_laplace.surrogate import (
    TrainConfig,
    batch_loss,
    baseline_constant_last,
    baseline_exponential_fit,
    grad,
    init_model,
    load_model,
    loss_rmse,
    normalize_prefix,
    predict,
    save_model,
    train,
)


def gbm_traj(x0=1.0, mu=4.0, sigma=0.2, n=100, seed=0, stream=0):
    grid = TimeGrid(np.arange(1, n + 1) / n)
    return sample_gbm_exact(GbmParams(x0, mu, sigma), grid, SeededRng(seed, stream))


def small_config(**kw):
    defaults = dict(query_count=16, hidden_width=8, latent_dim=4, input_grid_size=8)
    defaults.update(kw)
    return TrainConfig(**defaults)


class TestNormalizePrefix:
    def test_constant_trajectory(self):
        t = np.linspace(0.05, 1.0, 20)
        traj = Trajectory(TimeGrid(t), np.full(20, 5.0))
        features, scale = normalize_prefix(traj, 0.5, 8)
        assert scale == 5.0
        np.testing.assert_allclose(features, 1.0)

    def test_monotone_growth_peaks_at_end(self):
        t = np.linspace(0.005, 1.0, 200)
        traj = Trajectory(TimeGrid(t), np.exp(4 * t))
        features, scale = normalize_prefix(traj, 0.5, 16)
        assert features[-1] == pytest.approx(1.0, rel=1e-3)
        assert np.argmax(features) == 15

    def test_too_few_prefix_points(self):
        t = np.array([0.8, 0.9])
        traj = Trajectory(TimeGrid(t), np.array([1.0, 2.0]))
        with pytest.raises(ValueError):
            normalize_prefix(traj, 0.5, 8)


class TestPredict:
    def test_zero_weights_zero_predictions(self):
        config = small_config()
        model = init_model(config)
        for key in model.weights:
            model.weights[key][:] = 0.0
        traj = gbm_traj()
        out = predict(model, traj, 0.5, np.array([0.6, 0.8]))
        np.testing.assert_array_equal(out, 0.0)

    def test_deterministic(self):
        model = init_model(small_config(seed=3))
        model.weights["head_w2"][:] = 0.01
        traj = gbm_traj(seed=3)
        t = np.array([0.55, 0.75, 0.95])
        a = predict(model, traj, 0.5, t)
        b = predict(model, traj, 0.5, t)
        np.testing.assert_array_equal(a, b)

    def test_hand_set_head_recovers_exponential(self):
        # head biases set to the analytic transform of the sigma=0 path
        mu, x0 = 4.0, 0.8
        config = TrainConfig(query_count=1024, hidden_width=8, latent_dim=4,
                             input_grid_size=16, sigma0=10.0, horizon=2.0)
        model = init_model(config)
        for key in model.weights:
            model.weights[key][:] = 0.0
        traj = gbm_traj(x0=x0, mu=mu, sigma=0.0, n=200)
        _, scale = normalize_prefix(traj, 0.5, config.input_grid_size)
        f = (x0 / scale) / (query_points(model.ilt_config) - mu)
        model.weights["head_b2"][:1024] = f.real
        model.weights["head_b2"][1024:] = f.imag
        t = np.linspace(0.55, 0.95, 9)
        out = predict(model, traj, 0.5, t)
        np.testing.assert_allclose(out, x0 * np.exp(mu * t), rtol=1e-2)

    def test_scale_equivariance(self):
        model = init_model(small_config(seed=1))
        model.weights["head_w2"][:] = 0.01
        traj = gbm_traj(seed=5)
        scaled = Trajectory(traj.grid, 7.5 * traj.values)
        t = np.array([0.6, 0.9])
        np.testing.assert_allclose(
            predict(model, scaled, 0.5, t), 7.5 * predict(model, traj, 0.5, t), rtol=1e-12
        )


class TestLossRmse:
    def test_zero_when_equal(self):
        assert loss_rmse([1.0, 2.0], [1.0, 2.0]) == 0.0

    def test_direct_value(self):
        assert loss_rmse([1.0, 1.0], [0.0, 0.0]) == 1.0

    def test_permutation_invariant(self):
        pred, targ = np.array([1.0, 3.0, 5.0]), np.array([2.0, 2.0, 7.0])
        perm = [2, 0, 1]
        assert loss_rmse(pred, targ) == pytest.approx(loss_rmse(pred[perm], targ[perm]))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            loss_rmse([1.0], [1.0, 2.0])


def make_batch(n_items, seed=0, sigma=0.3):
    batch = []
    for i in range(n_items):
        traj = gbm_traj(mu=3.0 + i, sigma=sigma, seed=seed, stream=i)
        post = traj.grid.times > 0.5
        batch.append((traj, 0.5, traj.grid.times[post], traj.values[post]))
    return batch


def finite_difference_check(model, batch, n_probes=5, eps=1e-5, rng=None):
    gen = rng or np.random.default_rng(0)
    g = grad(model, batch)
    worst = 0.0
    for key, w in model.weights.items():
        for _ in range(n_probes):
            idx = tuple(gen.integers(0, dim) for dim in w.shape)
            orig = w[idx]
            w[idx] = orig + eps
            lp = batch_loss(model, batch)
            w[idx] = orig - eps
            lm = batch_loss(model, batch)
            w[idx] = orig
            fd = (lp - lm) / (2 * eps)
            an = g[key][idx]
            if max(abs(fd), abs(an)) < 1e-8:
                continue
            worst = max(worst, abs(fd - an) / max(abs(fd), abs(an)))
    return worst


class TestGrad:
    def test_zero_model_bias_gradient(self):
        config = small_config()
        model = init_model(config)
        for key in model.weights:
            model.weights[key][:] = 0.0
        batch = make_batch(2)
        g = grad(model, batch)
        # with all-zero weights only the head output bias can move the loss
        for key in ("enc_w1", "enc_b1", "enc_w2", "head_w1", "head_b1"):
            np.testing.assert_array_equal(g[key], 0.0)
        assert np.any(g["head_b2"] != 0.0)
        assert finite_difference_check(model, batch) < 1e-4

    def test_matches_finite_differences(self):
        model = init_model(small_config(seed=2))
        gen = np.random.default_rng(1)
        for key in ("head_w2", "head_b2"):
            model.weights[key][:] = 1e-3 * gen.standard_normal(model.weights[key].shape)
        batch = make_batch(3, seed=2)
        assert finite_difference_check(model, batch, rng=gen) < 1e-4

    def test_duplicate_entry_mean_semantics(self):
        model = init_model(small_config(seed=4))
        model.weights["head_w2"][:] = 1e-3
        batch = make_batch(1, seed=4)
        g1 = grad(model, batch)
        g2 = grad(model, batch * 3)
        for key in g1:
            np.testing.assert_allclose(g1[key], g2[key], rtol=1e-12, atol=1e-15)

    def test_empty_batch_rejected(self):
        with pytest.raises(ValueError):
            grad(init_model(small_config()), [])


class TestTrain:
    def test_zero_epochs_rejected(self):
        with pytest.raises(ValueError):
            TrainConfig(epochs=0)

    def test_loss_decreases(self):
        trajs = [gbm_traj(mu=4.0, sigma=0.1, seed=10, stream=i) for i in range(50)]
        config = TrainConfig(epochs=30, seed=0)
        _, report = train(trajs, config)
        assert np.mean(report.train_losses[-5:]) < np.mean(report.train_losses[:5])
        assert len(report.train_losses) == 30

    def test_deterministic(self):
        trajs = [gbm_traj(seed=11, stream=i) for i in range(10)]
        config = small_config(epochs=3, batch_size=4)
        m1, _ = train(trajs, config)
        m2, _ = train(trajs, config)
        for key in m1.weights:
            np.testing.assert_array_equal(m1.weights[key], m2.weights[key])

    def test_empty_dataset_rejected(self):
        with pytest.raises(ValueError):
            train([], small_config())


class TestBaselines:
    def test_exponential_fit_exact_on_noiseless(self):
        traj = gbm_traj(x0=1.0, mu=4.0, sigma=0.0, n=200)
        x0_hat, mu_hat = baseline_exponential_fit(traj, 0.5)
        assert mu_hat == pytest.approx(4.0, abs=1e-9)
        assert x0_hat == pytest.approx(1.0, abs=1e-9)

    def test_exponential_fit_estimator_spread(self):
        # median |mu_hat - mu| over 100 seeds stays within 0.5
        errs = []
        for seed in range(100):
            traj = gbm_traj(x0=0.5, mu=6.0, sigma=0.1, n=200, seed=seed)
            _, mu_hat = baseline_exponential_fit(traj, 0.5)
            errs.append(abs(mu_hat - 6.0))
        assert np.median(errs) < 0.5

    def test_exponential_fit_rejects_nonpositive(self):
        t = np.linspace(0.1, 1.0, 10)
        traj = Trajectory(TimeGrid(t), np.linspace(-0.5, 1.0, 10))
        with pytest.raises(ValueError):
            baseline_exponential_fit(traj, 0.5)

    def test_constant_last_perfect_on_constant(self):
        t = np.linspace(0.05, 1.0, 20)
        traj = Trajectory(TimeGrid(t), np.full(20, 2.5))
        pred = baseline_constant_last(traj, 0.5)
        post = t > 0.5
        assert loss_rmse(np.full(post.sum(), pred), traj.values[post]) == 0.0

    def test_constant_last_underestimates_growth(self):
        traj = gbm_traj(mu=4.0, sigma=0.0)
        pred = baseline_constant_last(traj, 0.5)
        post = traj.grid.times > 0.5
        assert (traj.values[post] > pred).all()

    def test_constant_last_single_point(self):
        traj = Trajectory(TimeGrid(np.array([0.3, 0.8])), np.array([1.5, 2.0]))
        assert baseline_constant_last(traj, 0.5) == 1.5

    def test_exponential_beats_constant_on_low_sigma(self):
        # strictly lower RMSE on >= 95% of sigma <= 0.2 trajectories
        wins = 0
        n = 60
        for i in range(n):
            traj = gbm_traj(x0=0.7, mu=5.0, sigma=0.15, seed=20, stream=i)
            post = traj.grid.times > 0.5
            t_post = traj.grid.times[post]
            x0_hat, mu_hat = baseline_exponential_fit(traj, 0.5)
            exp_rmse = loss_rmse(x0_hat * np.exp(mu_hat * t_post), traj.values[post])
            const = baseline_constant_last(traj, 0.5)
            const_rmse = loss_rmse(np.full(t_post.size, const), traj.values[post])
            wins += exp_rmse < const_rmse
        assert wins / n >= 0.95


class TestSerialization:
    def test_round_trip_bit_identical(self, tmp_path):
        config = small_config(seed=6)
        model = init_model(config)
        model.weights["head_w2"][:] = 0.01
        path = tmp_path / "model.npz"
        save_model(model, path)
        loaded = load_model(path)
        traj = gbm_traj(seed=6)
        t = np.array([0.6, 0.8])
        np.testing.assert_array_equal(
            predict(model, traj, 0.5, t), predict(loaded, traj, 0.5, t)
        )
        for key in model.weights:
            np.testing.assert_array_equal(model.weights[key], loaded.weights[key])

    def test_version_check(self, tmp_path):
        import gbm_laplace.surrogate as sg
        model = init_model(small_config())
        path = tmp_path / "model.npz"
        old = sg.FORMAT_VERSION
        try:
            sg.FORMAT_VERSION = 99
            save_model(model, path)
        finally:
            sg.FORMAT_VERSION = old
        with pytest.raises(ValueError):
            load_model(path)
