"""Heteroscedastic mean-response emulator on replicated synthetic data."""
from __future__ import annotations

import numpy as np
import pytest
from scipy.stats import spearmanr

from levelmatch.gp import FitSettings
from levelmatch.hetgp import HetGPEmulator, fit_hetgp, predict_mean_response

FAST = FitSettings(restarts=2, max_iter=50, seed=0)


class TestConstantData:
    def test_recovers_constant(self):
        rng = np.random.default_rng(0)
        x = np.repeat(rng.uniform(size=(10, 1)), 3, axis=0)
        c = 42.0
        y = np.full(30, c)
        em = fit_hetgp(x, y, settings=FAST, n_binary=0)
        m, _ = em.predict_batch(rng.uniform(size=(20, 1)))
        assert np.max(np.abs(m - c)) < 0.01 * abs(c) + 1e-6

    def test_variance_of_mean_tiny_at_training_points(self):
        rng = np.random.default_rng(1)
        x = np.repeat(rng.uniform(size=(8, 1)), 3, axis=0)
        y = np.full(24, 5.0)
        em = fit_hetgp(x, y, settings=FAST, n_binary=0)
        _, v = em.predict_latent(em.x0)  # standardized scale
        assert (v < 1e-4).all()


class TestLinearSignal:
    def test_mean_recovery_on_held_out_points(self):
        rng = np.random.default_rng(2)
        x = rng.uniform(size=(100, 1))
        y = x[:, 0] + 0.01 * rng.normal(size=100)
        em = fit_hetgp(x, y, settings=FAST, n_binary=0)
        xs = rng.uniform(0.05, 0.95, size=(20, 1))
        m, _ = em.predict_batch(xs)
        assert np.max(np.abs(m - xs[:, 0])) < 0.05

    def test_far_field_reverts_to_prior(self):
        rng = np.random.default_rng(3)
        x = rng.uniform(0.0, 0.02, size=(30, 1))
        y = 3.0 + 0.5 * rng.normal(size=30)
        em = fit_hetgp(x, y, settings=FAST, n_binary=0)
        # force a short lengthscale so 1.0 is far field, then check reversion
        m, v = em.predict_latent(np.array([[50.0]]))
        assert abs(m[0]) < 0.05 * np.sqrt(em.mean_kernel.alpha2) + 1e-9
        assert abs(v[0] - em.mean_kernel.alpha2) < 0.05 * em.mean_kernel.alpha2


class TestHeteroscedasticity:
    def test_noise_profile_rank_correlates(self):
        rng = np.random.default_rng(4)
        x0 = rng.uniform(size=(150, 1))
        x = np.repeat(x0, 4, axis=0)
        true_sd = 0.1 + 0.9 * x[:, 0]
        y = np.sin(2 * x[:, 0]) + true_sd * rng.normal(size=600)
        em = fit_hetgp(x, y, settings=FAST, n_binary=0)
        fitted_sd = np.sqrt(em.y_scale ** 2 * np.exp(em.log_delta2))
        rho = spearmanr(fitted_sd, 0.1 + 0.9 * em.x0[:, 0]).statistic
        assert rho > 0.5

    def test_replication_shrinks_mean_variance(self):
        rng = np.random.default_rng(5)
        base = rng.uniform(size=(12, 1))
        x = np.vstack([np.repeat(base[:1], 50, axis=0), np.repeat(base[1:], 2, axis=0)])
        y = 2.0 + 0.5 * rng.normal(size=x.shape[0])
        em = fit_hetgp(x, y, settings=FAST, n_binary=0)
        heavy = np.where((em.x0 == base[0]).all(axis=1))[0][0]
        _, v = em.predict_latent(em.x0[heavy][None, :])
        sample_var = float(np.var((y[:50] - em.y_shift) / em.y_scale, ddof=1))
        assert v[0] < sample_var / 25


class TestApi:
    def test_observation_variance_exceeds_mean_variance(self):
        rng = np.random.default_rng(6)
        x = np.repeat(rng.uniform(size=(25, 1)), 2, axis=0)
        y = x[:, 0] + 0.3 * rng.normal(size=50)
        em = fit_hetgp(x, y, settings=FAST, n_binary=0)
        xs = rng.uniform(size=(15, 1))
        _, v_mean = em.predict_batch(xs)
        v_obs = em.observation_variance(xs)
        assert (v_obs > v_mean).all()

    def test_predict_wrapper_and_native_units(self):
        rng = np.random.default_rng(7)
        x = rng.uniform(size=(40, 1))
        y = 100.0 + 10.0 * x[:, 0] + 0.5 * rng.normal(size=40)
        em = fit_hetgp(x, y, settings=FAST, n_binary=0)
        pred = predict_mean_response(em, np.array([0.5]))
        assert 95.0 < pred.mean < 115.0
        assert pred.variance > 0

    def test_deterministic(self):
        rng = np.random.default_rng(8)
        x = rng.uniform(size=(30, 1))
        y = x[:, 0] + 0.1 * rng.normal(size=30)
        a = fit_hetgp(x, y, settings=FAST, n_binary=0)
        b = fit_hetgp(x, y, settings=FAST, n_binary=0)
        np.testing.assert_array_equal(a.mean_kernel.to_log_vector(),
                                      b.mean_kernel.to_log_vector())
        np.testing.assert_array_equal(a.log_delta2, b.log_delta2)

    def test_rejects_mismatched_lengths(self):
        with pytest.raises(ValueError):
            fit_hetgp(np.zeros((3, 1)), np.zeros(4))

    def test_mixed_binary_column(self):
        rng = np.random.default_rng(9)
        xc = rng.uniform(size=(60, 1))
        xb = rng.integers(0, 2, size=(60, 1)).astype(float)
        x = np.hstack([xc, xb])
        y = xc[:, 0] + 2.0 * xb[:, 0] + 0.05 * rng.normal(size=60)
        em = fit_hetgp(x, y, settings=FAST, n_binary=1)
        m0, _ = em.predict_batch(np.array([[0.5, 0.0]]))
        m1, _ = em.predict_batch(np.array([[0.5, 1.0]]))
        assert m1[0] - m0[0] > 1.0
