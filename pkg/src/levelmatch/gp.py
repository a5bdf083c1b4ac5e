"""Shared Gaussian-process machinery.

Regression evidence/posterior with fixed per-point noise, a jitter ladder for
failed factorizations, and the multi-restart MAP optimizer used by both
emulator kinds. Hyperparameters are optimized in log space; the objective is
the (approximate) log marginal likelihood plus the log prior densities of the
natural parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.optimize import minimize
from scipy.stats import norm

from .kernels import HyperPriors, KernelParams, gram, gram_gradients

JITTER_START = 1e-8
JITTER_MAX = 1e-2


class FitError(RuntimeError):
    """Emulator fitting failed; carries the best parameters seen so far."""

    def __init__(self, message: str, best_params: KernelParams | None = None):
        super().__init__(message)
        self.best_params = best_params


@dataclass(frozen=True)
class Prediction:
    """Mean and variance of a latent quantity at one input."""

    mean: float
    variance: float

    def __post_init__(self):
        if not (np.isfinite(self.mean) and np.isfinite(self.variance)):
            raise ValueError("prediction must be finite")
        if self.variance < 0:
            raise ValueError("prediction variance must be nonnegative")


def prob_below(pred: Prediction, threshold: float) -> float:
    """P(latent < threshold) under the normal predictive."""
    if pred.variance == 0.0:
        if pred.mean == threshold:
            return 0.5
        return 1.0 if pred.mean < threshold else 0.0
    return float(norm.cdf((threshold - pred.mean) / np.sqrt(pred.variance)))


def joint_prob_below(preds: list[Prediction], thresholds: list[float]) -> float:
    """Criteria are treated as independent, so the joint is the product."""
    p = 1.0
    for pred, t in zip(preds, thresholds):
        p *= prob_below(pred, t)
    return p


def chol_with_jitter(a: np.ndarray, alpha2: float) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor, escalating diagonal jitter x10 from 1e-8*alpha2
    up to 1e-2*alpha2 before giving up."""
    jitter = JITTER_START
    while jitter <= JITTER_MAX * 1.0001:
        try:
            L = cholesky(a + jitter * alpha2 * np.eye(a.shape[0]), lower=True)
            return L, jitter * alpha2
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise FitError("kernel matrix not factorizable even at maximum jitter")


# ---------------------------------------------------------------------------
# Regression GP with fixed heteroscedastic noise
# ---------------------------------------------------------------------------

def regression_log_posterior(params: KernelParams, priors: HyperPriors, x: np.ndarray,
                             y: np.ndarray, noise: np.ndarray,
                             want_grad: bool = True) -> tuple[float, np.ndarray | None]:
    """Exact log marginal likelihood + log prior, and its log-space gradient."""
    n = x.shape[0]
    K = gram(params, x)
    C = K + np.diag(noise) + JITTER_START * params.alpha2 * np.eye(n)
    try:
        L = cholesky(C, lower=True)
    except np.linalg.LinAlgError:
        return -np.inf, None
    a = cho_solve((L, True), y)
    logml = -0.5 * float(y @ a) - float(np.sum(np.log(np.diag(L)))) - 0.5 * n * np.log(2 * np.pi)
    logpost = logml + priors.log_density(params)
    if not want_grad:
        return logpost, None
    Cinv = cho_solve((L, True), np.eye(n))
    grads = gram_gradients(params, x, K)
    g = np.empty(len(grads))
    for j, dK in enumerate(grads):
        g[j] = 0.5 * float(a @ dK @ a) - 0.5 * float(np.sum(Cinv * dK))
    g += priors.log_density_grad(params)
    return logpost, g


@dataclass
class RegressionPosterior:
    """Fitted regression GP: training rows, kernel, noise vector, chol factor."""

    params: KernelParams
    x: np.ndarray
    y: np.ndarray
    noise: np.ndarray
    L: np.ndarray = field(init=False, repr=False)
    alpha: np.ndarray = field(init=False, repr=False)
    jitter: float = field(init=False)

    def __post_init__(self):
        K = gram(self.params, self.x) + np.diag(self.noise)
        self.L, self.jitter = chol_with_jitter(K, self.params.alpha2)
        self.alpha = cho_solve((self.L, True), self.y)

    def predict(self, xstar: np.ndarray, chunk: int = 8192) -> tuple[np.ndarray, np.ndarray]:
        """Posterior mean and variance of the latent function at unit rows."""
        from .kernels import cross_cov

        xstar = np.atleast_2d(xstar)
        means = np.empty(xstar.shape[0])
        variances = np.empty(xstar.shape[0])
        for s in range(0, xstar.shape[0], chunk):
            blk = xstar[s:s + chunk]
            ks = cross_cov(self.params, self.x, blk)
            means[s:s + chunk] = ks.T @ self.alpha
            v = solve_triangular(self.L, ks, lower=True)
            variances[s:s + chunk] = self.params.alpha2 - np.einsum("ij,ij->j", v, v)
        np.maximum(variances, 0.0, out=variances)
        return means, variances


# ---------------------------------------------------------------------------
# MAP optimization with restarts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FitSettings:
    """Optimizer controls; identical settings and seed give identical fits."""

    restarts: int = 5
    max_iter: int = 60
    seed: int = 0
    log_bounds: tuple[float, float] = (-8.0, 8.0)


def map_optimize(objective, n_continuous: int, n_binary: int, priors: HyperPriors,
                 settings: FitSettings, start: KernelParams | None = None) -> KernelParams:
    """Maximize objective(theta_log) -> (value, grad) over kernel log-params.

    Runs a quasi-Newton search from a default start (or the supplied warm
    start) plus `restarts` draws from the priors. Best final value wins;
    exact ties break toward the lexicographically smallest parameter vector.
    """
    rng = np.random.default_rng(settings.seed)
    if start is None:
        start = KernelParams(alpha2=1.0, lengthscales=np.full(n_continuous, 0.8),
                             binary_corr=np.full(n_binary, 0.3))
    starts = [start] + [priors.sample(rng, n_continuous, n_binary)
                        for _ in range(settings.restarts)]

    def neg(theta):
        params = KernelParams.from_log_vector(theta, n_continuous, n_binary)
        val, grad = objective(params)
        if not np.isfinite(val) or grad is None:
            return 1e25, np.zeros_like(theta)
        return -val, -grad

    lo, hi = settings.log_bounds
    bounds = [(lo, hi)] * (1 + n_continuous + n_binary)
    results = []
    for p0 in starts:
        theta0 = np.clip(p0.to_log_vector(), lo, hi)
        res = minimize(neg, theta0, jac=True, method="L-BFGS-B", bounds=bounds,
                       options={"maxiter": settings.max_iter})
        if np.isfinite(res.fun) and res.fun < 1e24:
            results.append((float(res.fun), tuple(res.x)))
    if not results:
        raise FitError("no optimizer restart reached a finite log posterior",
                       best_params=start)
    results.sort(key=lambda r: (r[0], r[1]))
    best = np.asarray(results[0][1])
    return KernelParams.from_log_vector(best, n_continuous, n_binary)
