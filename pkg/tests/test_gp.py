"""GP regression core: closed-form oracle, gradients, information monotonicity."""
from __future__ import annotations

import numpy as np
import pytest
from scipy.stats import norm

from levelmatch.gp import (FitSettings, Prediction, RegressionPosterior,
                           chol_with_jitter, map_optimize, prob_below,
                           joint_prob_below, regression_log_posterior)
from levelmatch.kernels import HyperPriors, KernelParams, cross_cov, gram


def oracle_posterior(params, x, y, noise, xstar):
    """Independent reference: direct inversion of the full covariance."""
    K = gram(params, x) + np.diag(noise) + 1e-8 * params.alpha2 * np.eye(len(y))
    Kinv = np.linalg.inv(K)
    ks = cross_cov(params, x, np.atleast_2d(xstar))
    mean = ks.T @ Kinv @ y
    var = params.alpha2 - np.einsum("ij,ij->j", ks, Kinv @ ks)
    return mean, var


def oracle_logml(params, x, y, noise):
    K = gram(params, x) + np.diag(noise) + 1e-8 * params.alpha2 * np.eye(len(y))
    sign, logdet = np.linalg.slogdet(K)
    assert sign > 0
    return float(-0.5 * y @ np.linalg.solve(K, y) - 0.5 * logdet
                 - 0.5 * len(y) * np.log(2 * np.pi))


class TestRegressionPosterior:
    def test_five_point_closed_form(self):
        x = np.array([[0.05], [0.25], [0.5], [0.7], [0.95]])
        y = np.array([0.2, -0.4, 1.3, 0.8, -0.7])
        params = KernelParams(alpha2=1.2, lengthscales=np.array([0.3]),
                              binary_corr=np.array([]))
        noise = np.full(5, 0.01)
        post = RegressionPosterior(params=params, x=x, y=y, noise=noise)
        xs = np.linspace(0, 1, 23)[:, None]
        m, v = post.predict(xs)
        m_ref, v_ref = oracle_posterior(params, x, y, noise, xs)
        np.testing.assert_allclose(m, m_ref, atol=1e-6)
        np.testing.assert_allclose(v, v_ref, atol=1e-6)

    def test_log_posterior_value_matches_oracle(self):
        rng = np.random.default_rng(3)
        x = rng.uniform(size=(12, 2))
        y = rng.normal(size=12)
        noise = rng.uniform(0.01, 0.1, size=12)
        params = KernelParams(alpha2=0.9, lengthscales=np.array([0.5, 1.5]),
                              binary_corr=np.array([]))
        priors = HyperPriors()
        val, _ = regression_log_posterior(params, priors, x, y, noise, want_grad=False)
        ref = oracle_logml(params, x, y, noise) + priors.log_density(params)
        assert val == pytest.approx(ref, rel=1e-10)

    def test_gradient_matches_central_differences(self):
        rng = np.random.default_rng(11)
        x = np.hstack([rng.uniform(size=(15, 2)),
                       rng.integers(0, 2, size=(15, 1)).astype(float)])
        y = rng.normal(size=15)
        noise = rng.uniform(0.05, 0.2, size=15)
        priors = HyperPriors()
        h = 1e-5
        for _ in range(10):
            params = priors.sample(rng, 2, 1)
            val, g = regression_log_posterior(params, priors, x, y, noise)
            theta = params.to_log_vector()
            for j in range(theta.size):
                tp, tm = theta.copy(), theta.copy()
                tp[j] += h
                tm[j] -= h
                vp, _ = regression_log_posterior(
                    KernelParams.from_log_vector(tp, 2, 1), priors, x, y, noise,
                    want_grad=False)
                vm, _ = regression_log_posterior(
                    KernelParams.from_log_vector(tm, 2, 1), priors, x, y, noise,
                    want_grad=False)
                fd = (vp - vm) / (2 * h)
                denom = max(abs(fd), 1e-8)
                assert abs(g[j] - fd) / denom < 1e-4

    def test_added_point_never_increases_variance(self):
        # exact GP on noiseless toy data: information is monotone
        rng = np.random.default_rng(5)
        params = KernelParams(alpha2=1.0, lengthscales=np.array([0.4]),
                              binary_corr=np.array([]))
        x = rng.uniform(size=(9, 1))
        y = np.sin(4 * x[:, 0])
        noise = np.full(9, 1e-10)
        xs = np.linspace(0, 1, 40)[:, None]
        post_small = RegressionPosterior(params=params, x=x[:8], y=y[:8], noise=noise[:8])
        post_full = RegressionPosterior(params=params, x=x, y=y, noise=noise)
        _, v_small = post_small.predict(xs)
        _, v_full = post_full.predict(xs)
        assert (v_full <= v_small + 1e-8).all()

    def test_prediction_continuity(self):
        params = KernelParams(alpha2=1.0, lengthscales=np.array([0.3]),
                              binary_corr=np.array([]))
        rng = np.random.default_rng(8)
        x = rng.uniform(size=(10, 1))
        y = rng.normal(size=10)
        post = RegressionPosterior(params=params, x=x, y=y, noise=np.full(10, 0.01))
        for eps in (1e-3, 1e-5, 1e-7):
            m0, _ = post.predict(np.array([[0.37]]))
            m1, _ = post.predict(np.array([[0.37 + eps]]))
            assert abs(m1[0] - m0[0]) < 10 * eps  # Lipschitz-style bound


class TestCholJitter:
    def test_singular_matrix_escalates(self):
        ones = np.ones((4, 4))
        L, jit = chol_with_jitter(ones, alpha2=1.0)
        assert jit >= 1e-8
        np.testing.assert_allclose(L @ L.T, ones + jit * np.eye(4), atol=1e-12)


class TestMapOptimize:
    def test_recovers_lengthscale_order(self):
        rng = np.random.default_rng(21)
        x = rng.uniform(size=(60, 1))
        y = np.sin(2 * np.pi * x[:, 0]) + 0.05 * rng.normal(size=60)
        noise = np.full(60, 0.05 ** 2)
        priors = HyperPriors()

        def obj(params):
            return regression_log_posterior(params, priors, x, y, noise)

        best = map_optimize(obj, 1, 0, priors, FitSettings(restarts=3, seed=0))
        assert 0.05 < best.lengthscales[0] < 1.0

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(2)
        x = rng.uniform(size=(20, 1))
        y = rng.normal(size=20)
        noise = np.full(20, 0.1)
        priors = HyperPriors()

        def obj(params):
            return regression_log_posterior(params, priors, x, y, noise)

        a = map_optimize(obj, 1, 0, priors, FitSettings(restarts=3, seed=5))
        b = map_optimize(obj, 1, 0, priors, FitSettings(restarts=3, seed=5))
        np.testing.assert_array_equal(a.to_log_vector(), b.to_log_vector())


class TestProbBelow:
    def test_symmetry_at_threshold(self):
        assert prob_below(Prediction(mean=15.0, variance=4.0), 15.0) == 0.5

    def test_three_sigma(self):
        p = prob_below(Prediction(mean=12.0, variance=1.0), 15.0)
        assert p == pytest.approx(norm.cdf(3.0), abs=1e-12)
        assert p == pytest.approx(0.99865, abs=1e-5)

    def test_joint_product(self):
        # per-criterion 0.932 and 0.894 combine to 0.833
        p1 = norm.ppf(0.932)
        p2 = norm.ppf(0.894)
        preds = [Prediction(mean=-p1, variance=1.0), Prediction(mean=-p2, variance=1.0)]
        joint = joint_prob_below(preds, [0.0, 0.0])
        assert joint == pytest.approx(0.932 * 0.894, rel=1e-10)
        assert round(joint, 3) == 0.833

    def test_zero_variance_step(self):
        assert prob_below(Prediction(mean=14.0, variance=0.0), 15.0) == 1.0
        assert prob_below(Prediction(mean=16.0, variance=0.0), 15.0) == 0.0
        assert prob_below(Prediction(mean=15.0, variance=0.0), 15.0) == 0.5

    def test_monotone_in_mean(self):
        means = np.linspace(-5, 5, 41)
        vals = [prob_below(Prediction(mean=m, variance=2.0), 0.0) for m in means]
        assert all(a >= b for a, b in zip(vals, vals[1:]))
