"""Gaussian-process classifier for binary outcomes.

A zero-mean latent GP on the logit of the event probability, Bernoulli
observations, Laplace approximation to the latent posterior, and MAP kernel
hyperparameters under the approximate marginal likelihood plus priors.
Replicated simulations enter as independent Bernoulli rows at duplicated
inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cholesky, solve_triangular

from .gp import FitError, FitSettings, Prediction, chol_with_jitter, map_optimize
from .kernels import HyperPriors, KernelParams, cross_cov, gram, gram_gradients

_NEWTON_MAX = 80
_NEWTON_TOL = 1e-11


def _sigmoid(f: np.ndarray) -> np.ndarray:
    out = np.empty_like(f)
    pos = f >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-f[pos]))
    ef = np.exp(f[~pos])
    out[~pos] = ef / (1.0 + ef)
    return out


def _log_lik(y: np.ndarray, f: np.ndarray) -> float:
    # sum of y*f - log(1 + e^f), computed stably
    return float(np.sum(y * f - np.logaddexp(0.0, f)))


def _newton_mode(K: np.ndarray, y: np.ndarray, f0: np.ndarray | None = None):
    """Find the latent posterior mode (GPML algorithm 3.1, stabilized form).

    Returns (f_hat, a, sqrtW, L, psi) where a = K^-1 f_hat implicitly,
    L = chol(I + sqrtW K sqrtW) at the mode, psi the Laplace objective.
    """
    n = y.size
    f = np.zeros(n) if f0 is None else f0.copy()
    a = np.zeros(n)
    psi = -np.inf  # first Newton step is always accepted
    I_n = np.eye(n)
    for _ in range(_NEWTON_MAX):
        p = _sigmoid(f)
        W = p * (1.0 - p)
        sW = np.sqrt(W)
        B = I_n + (sW[:, None] * K) * sW[None, :]
        L = cholesky(B, lower=True)
        grad = y - p
        b = W * f + grad
        v = solve_triangular(L, sW * (K @ b), lower=True)
        a_new = b - sW * solve_triangular(L.T, v, lower=False)
        f_new = K @ a_new
        psi_new = -0.5 * float(a_new @ f_new) + _log_lik(y, f_new)
        # halve the step if the full Newton step fails to improve
        step = 1.0
        while psi_new < psi - 1e-12 and step > 1e-4:
            step *= 0.5
            a_new = a + step * (a_new - a)
            f_new = K @ a_new
            psi_new = -0.5 * float(a_new @ f_new) + _log_lik(y, f_new)
        converged = abs(psi_new - psi) < _NEWTON_TOL
        f, a, psi = f_new, a_new, psi_new
        if converged:
            break
    p = _sigmoid(f)
    W = p * (1.0 - p)
    sW = np.sqrt(W)
    B = I_n + (sW[:, None] * K) * sW[None, :]
    L = cholesky(B, lower=True)
    return f, a, sW, L, psi


def laplace_evidence(params: KernelParams, priors: HyperPriors, x: np.ndarray,
                     y: np.ndarray, f0: np.ndarray | None = None,
                     want_grad: bool = True):
    """Approximate log posterior of the hyperparameters and its log-space
    gradient (GPML algorithm 5.1 plus prior terms)."""
    n = y.size
    K = gram(params, x) + 1e-8 * params.alpha2 * np.eye(n)
    try:
        f, a, sW, L, psi = _newton_mode(K, y, f0)
    except np.linalg.LinAlgError:
        return -np.inf, None, None
    log_z = psi - float(np.sum(np.log(np.diag(L))))
    value = log_z + priors.log_density(params)
    if not want_grad:
        return value, None, f

    p = _sigmoid(f)
    grad_ll = y - p
    d3 = -p * (1.0 - p) * (1.0 - 2.0 * p)  # third derivative of the log likelihood
    # R = sW (I + sW K sW)^-1 sW,  C = L \ (sW K)
    sWm = solve_triangular(L, np.diag(sW), lower=True)
    R = sWm.T @ sWm
    C = solve_triangular(L, sW[:, None] * K, lower=True)
    post_var = np.diag(K) - np.einsum("ij,ij->j", C, C)
    # dZ/df_i at the mode: -0.5 * dlog|B|/dW_ii * dW_ii/df_i, and dW/df = -d3
    s2 = 0.5 * post_var * d3

    grads = gram_gradients(params, x, K)
    g = np.empty(len(grads))
    for j, dK in enumerate(grads):
        s1 = 0.5 * float(a @ dK @ a) - 0.5 * float(np.sum(R * dK))
        b = dK @ grad_ll
        s3 = b - K @ (R @ b)
        g[j] = s1 + float(s2 @ s3)
    g += priors.log_density_grad(params)
    return value, g, f


@dataclass
class ClassifierEmulator:
    """Fitted latent-logit emulator for a binary simulator output."""

    kernel: KernelParams
    x: np.ndarray
    y: np.ndarray
    f_hat: np.ndarray = field(init=False, repr=False)
    _sW: np.ndarray = field(init=False, repr=False)
    _L: np.ndarray = field(init=False, repr=False)
    jitter: float = field(init=False)

    def __post_init__(self):
        K = gram(self.kernel, self.x)
        _, self.jitter = chol_with_jitter(K, self.kernel.alpha2)
        K += self.jitter * np.eye(self.x.shape[0])
        self.f_hat, _, self._sW, self._L, _ = _newton_mode(K, self.y)

    def predict_batch(self, xstar: np.ndarray, chunk: int = 8192) -> tuple[np.ndarray, np.ndarray]:
        """Latent logit mean and variance at unit rows."""
        xstar = np.atleast_2d(xstar)
        grad_ll = self.y - _sigmoid(self.f_hat)
        means = np.empty(xstar.shape[0])
        variances = np.empty(xstar.shape[0])
        for s in range(0, xstar.shape[0], chunk):
            blk = xstar[s:s + chunk]
            ks = cross_cov(self.kernel, self.x, blk)
            means[s:s + chunk] = ks.T @ grad_ll
            v = solve_triangular(self._L, self._sW[:, None] * ks, lower=True)
            variances[s:s + chunk] = self.kernel.alpha2 - np.einsum("ij,ij->j", v, v)
        np.maximum(variances, 0.0, out=variances)
        return means, variances

    def predict(self, x: np.ndarray) -> Prediction:
        m, v = self.predict_batch(np.atleast_2d(x))
        return Prediction(mean=float(m[0]), variance=float(v[0]))

    def predict_probability(self, xstar: np.ndarray) -> np.ndarray:
        """Moderated event probability E[sigmoid(f)] via the probit bridge."""
        m, v = self.predict_batch(xstar)
        kappa = 1.0 / np.sqrt(1.0 + np.pi * v / 8.0)
        return _sigmoid(kappa * m)


def predict_logit(em: ClassifierEmulator, x: np.ndarray) -> Prediction:
    return em.predict(x)


def fit_classifier(x: np.ndarray, y: np.ndarray, priors: HyperPriors | None = None,
                   settings: FitSettings | None = None,
                   n_binary: int | None = None) -> ClassifierEmulator:
    """MAP-fit the classifier kernel and build the Laplace posterior.

    n_binary gives the number of trailing binary columns; when omitted it is
    inferred as the longest trailing run of all-0/1 columns.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if x.shape[0] != y.size:
        raise ValueError("label count must equal input count")
    if x.shape[0] < 2:
        raise ValueError("need at least 2 observations")
    if not np.isin(y, (0.0, 1.0)).all():
        raise ValueError("labels must be 0 or 1")
    priors = priors or HyperPriors()
    settings = settings or FitSettings()
    nb = _infer_dims(x)[1] if n_binary is None else n_binary
    nc = x.shape[1] - nb

    warm: dict = {"f": None}

    def objective(params: KernelParams):
        val, grad, f = laplace_evidence(params, priors, x, y, f0=warm["f"])
        if f is not None:
            warm["f"] = f
        return val, grad

    kernel = map_optimize(objective, nc, nb, priors, settings)
    return ClassifierEmulator(kernel=kernel, x=x, y=y)


def _infer_dims(x: np.ndarray) -> tuple[int, int]:
    """Trailing columns holding only 0/1 values are treated as binary."""
    d = x.shape[1]
    nb = 0
    for j in range(d - 1, -1, -1):
        if np.isin(x[:, j], (0.0, 1.0)).all():
            nb += 1
        else:
            break
    return d - nb, nb
