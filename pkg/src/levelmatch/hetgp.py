"""Heteroscedastic GP for a replicated stochastic response.

The mean response is a zero-mean GP (after standardization) observed with
input-dependent noise delta2(x); log delta2 is itself a GP fitted to
moment-corrected log residual variances. Fitting alternates the two MAP
kernel fits until the joint log posterior stabilizes. The predictive variance
of the MEAN excludes delta2; delta2 is added back only for intervals on new
single observations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import digamma, polygamma

from .gp import (FitSettings, Prediction, RegressionPosterior, map_optimize,
                 regression_log_posterior)
from .kernels import HyperPriors, KernelParams

_OUTER_MAX = 20
_OUTER_TOL = 1e-6
_VAR_FLOOR = 1e-8


def _group_replicates(x: np.ndarray, y: np.ndarray):
    """Collapse duplicated rows: unique inputs, counts, means, within-point SSE."""
    x0, inverse = np.unique(x, axis=0, return_inverse=True)
    n0 = x0.shape[0]
    counts = np.bincount(inverse, minlength=n0).astype(float)
    sums = np.bincount(inverse, weights=y, minlength=n0)
    means = sums / counts
    sse = np.bincount(inverse, weights=(y - means[inverse]) ** 2, minlength=n0)
    return x0, inverse, counts, means, sse


def _log_var_targets(counts: np.ndarray, resid_ms: np.ndarray):
    """Bias-corrected log of mean squared residuals, with log-chi2 noise.

    For k residual degrees of freedom, E[log(chi2_k/k)] = psi(k/2)-log(k/2)
    and Var[log chi2_k] = psi'(k/2); points without replicates fall back to
    a single degree of freedom.
    """
    k = np.maximum(counts, 1.0)
    z = np.log(np.maximum(resid_ms, _VAR_FLOOR)) - (digamma(k / 2.0) - np.log(k / 2.0))
    noise = polygamma(1, k / 2.0)
    return z, noise


@dataclass
class HetGPEmulator:
    """Fitted mean-response emulator with a companion log-variance GP.

    Predictions are on the native response scale; standardization constants
    are kept so snapshots can rebuild the emulator bit-identically.
    """

    mean_kernel: KernelParams
    logvar_kernel: KernelParams
    x0: np.ndarray
    y_mean: np.ndarray          # standardized per-point means
    counts: np.ndarray
    log_delta2: np.ndarray      # fitted (smoothed) log noise variance at x0
    z_raw: np.ndarray           # raw log-variance targets the smoother was fit to
    y_shift: float
    y_scale: float
    z_shift: float
    z_scale: float
    z_noise: np.ndarray
    _mean_post: RegressionPosterior = field(init=False, repr=False)
    _logvar_post: RegressionPosterior = field(init=False, repr=False)

    def __post_init__(self):
        delta2 = np.exp(self.log_delta2)
        self._mean_post = RegressionPosterior(
            params=self.mean_kernel, x=self.x0, y=self.y_mean,
            noise=delta2 / self.counts)
        z_std = (self.z_raw - self.z_shift) / self.z_scale
        self._logvar_post = RegressionPosterior(
            params=self.logvar_kernel, x=self.x0, y=z_std, noise=self.z_noise / self.z_scale ** 2)

    # -- latent-scale access (standardized response) ------------------------

    def predict_latent(self, xstar: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self._mean_post.predict(xstar)

    def noise_variance_latent(self, xstar: np.ndarray) -> np.ndarray:
        zm, _ = self._logvar_post.predict(xstar)
        return np.exp(self.z_shift + self.z_scale * zm)

    # -- native-scale API ----------------------------------------------------

    def predict_batch(self, xstar: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Mean and variance of the MEAN response at unit rows, native units."""
        m, v = self.predict_latent(xstar)
        return self.y_shift + self.y_scale * m, self.y_scale ** 2 * v

    def predict(self, x: np.ndarray) -> Prediction:
        m, v = self.predict_batch(np.atleast_2d(x))
        return Prediction(mean=float(m[0]), variance=float(v[0]))

    def observation_variance(self, xstar: np.ndarray) -> np.ndarray:
        """Total predictive variance for one new observation: mean uncertainty
        plus the local noise variance delta2(x)."""
        _, v = self.predict_latent(np.atleast_2d(xstar))
        return self.y_scale ** 2 * (v + self.noise_variance_latent(np.atleast_2d(xstar)))


def predict_mean_response(em: HetGPEmulator, x: np.ndarray) -> Prediction:
    return em.predict(x)


def fit_hetgp(x: np.ndarray, y: np.ndarray, priors: HyperPriors | None = None,
              settings: FitSettings | None = None,
              n_binary: int | None = None) -> HetGPEmulator:
    """Alternating MAP fit of the mean and log-variance kernels."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if x.shape[0] != y.size:
        raise ValueError("response count must equal input count")
    if x.shape[0] < 2:
        raise ValueError("need at least 2 observations")
    priors = priors or HyperPriors()
    settings = settings or FitSettings()
    if n_binary is None:
        from .classifier import _infer_dims
        n_binary = _infer_dims(x)[1]
    nc = x.shape[1] - n_binary

    y_shift = float(np.mean(y))
    sd = float(np.std(y))
    y_scale = sd if sd > 1e-12 else 1.0
    ys = (y - y_shift) / y_scale

    x0, inverse, counts, means, sse = _group_replicates(x, ys)
    n0 = x0.shape[0]

    # initial noise: pooled replicate variance, or a fraction of total variance
    rep_mask = counts > 1
    if rep_mask.any():
        pooled = float(np.sum(sse[rep_mask]) / np.sum(counts[rep_mask] - 1))
    else:
        pooled = 0.1 * max(float(np.var(ys)), _VAR_FLOOR)
    log_delta2 = np.full(n0, np.log(max(pooled, _VAR_FLOOR)))

    mean_kernel: KernelParams | None = None
    logvar_kernel: KernelParams | None = None
    z_raw = log_delta2.copy()
    z_shift = z_scale = 0.0
    z_noise = np.ones(n0)
    prev_joint = -np.inf

    for outer in range(_OUTER_MAX):
        sub = FitSettings(restarts=settings.restarts if outer == 0 else 0,
                          max_iter=settings.max_iter, seed=settings.seed,
                          log_bounds=settings.log_bounds)
        delta2 = np.exp(log_delta2)
        noise_vec = delta2 / counts

        def mean_obj(params: KernelParams):
            return regression_log_posterior(params, priors, x0, means, noise_vec)

        mean_kernel = map_optimize(mean_obj, nc, n_binary, priors, sub, start=mean_kernel)
        mean_val, _ = regression_log_posterior(mean_kernel, priors, x0, means, noise_vec,
                                               want_grad=False)
        mean_post = RegressionPosterior(params=mean_kernel, x=x0, y=means, noise=noise_vec)
        mu0, _ = mean_post.predict(x0)

        # residual second moments around the smoothed mean
        resid_ms = (sse + counts * (means - mu0) ** 2) / counts
        z_raw, z_noise = _log_var_targets(counts, resid_ms)
        z_shift = float(np.mean(z_raw))
        z_sd = float(np.std(z_raw))
        z_scale = z_sd if z_sd > 1e-12 else 1.0
        z_std = (z_raw - z_shift) / z_scale
        zn_std = z_noise / z_scale ** 2

        def logvar_obj(params: KernelParams):
            return regression_log_posterior(params, priors, x0, z_std, zn_std)

        logvar_kernel = map_optimize(logvar_obj, nc, n_binary, priors, sub,
                                     start=logvar_kernel)
        lv_val, _ = regression_log_posterior(logvar_kernel, priors, x0, z_std, zn_std,
                                             want_grad=False)
        lv_post = RegressionPosterior(params=logvar_kernel, x=x0, y=z_std, noise=zn_std)
        zm, _ = lv_post.predict(x0)
        log_delta2 = np.maximum(z_shift + z_scale * zm, np.log(_VAR_FLOOR))

        joint = mean_val + lv_val
        if abs(joint - prev_joint) < _OUTER_TOL:
            prev_joint = joint
            break
        prev_joint = joint

    return HetGPEmulator(mean_kernel=mean_kernel, logvar_kernel=logvar_kernel,
                         x0=x0, y_mean=means, counts=counts, log_delta2=log_delta2,
                         z_raw=z_raw, y_shift=y_shift, y_scale=y_scale,
                         z_shift=z_shift, z_scale=z_scale, z_noise=z_noise)
