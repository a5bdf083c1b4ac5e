"""Mixed continuous/binary covariance function and hyperparameter priors.

The kernel between points a and b with continuous parts ac, bc and binary
parts ab, bb is

    k(a, b) = alpha2 * exp( - sum_i (ac_i - bc_i)^2 / l_i^2
                            - sum_j phi_j * 1[ab_j != bb_j] )

so two points decorrelate with squared continuous distance per lengthscale
and with a per-variable penalty phi for every binary mismatch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln


@dataclass(frozen=True)
class KernelParams:
    """Process variance, one lengthscale per continuous dim, one mismatch
    penalty per binary dim."""

    alpha2: float
    lengthscales: np.ndarray
    binary_corr: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lengthscales", np.asarray(self.lengthscales, dtype=float))
        object.__setattr__(self, "binary_corr", np.asarray(self.binary_corr, dtype=float))
        if self.alpha2 <= 0:
            raise ValueError("alpha2 must be positive")
        if (self.lengthscales <= 0).any():
            raise ValueError("lengthscales must be positive")
        if (self.binary_corr < 0).any():
            raise ValueError("binary_corr must be nonnegative")

    @property
    def n_continuous(self) -> int:
        return self.lengthscales.size

    @property
    def n_binary(self) -> int:
        return self.binary_corr.size

    def to_log_vector(self) -> np.ndarray:
        return np.log(np.concatenate([[self.alpha2], self.lengthscales,
                                      np.maximum(self.binary_corr, 1e-12)]))

    @classmethod
    def from_log_vector(cls, theta: np.ndarray, n_continuous: int, n_binary: int) -> "KernelParams":
        theta = np.asarray(theta, dtype=float)
        v = np.exp(theta)
        return cls(alpha2=float(v[0]),
                   lengthscales=v[1:1 + n_continuous],
                   binary_corr=v[1 + n_continuous:1 + n_continuous + n_binary])

    def to_dict(self) -> dict:
        return {"alpha2": float(self.alpha2),
                "lengthscales": [float(v) for v in self.lengthscales],
                "binary_corr": [float(v) for v in self.binary_corr]}

    @classmethod
    def from_dict(cls, d: dict) -> "KernelParams":
        return cls(alpha2=d["alpha2"],
                   lengthscales=np.asarray(d["lengthscales"], dtype=float),
                   binary_corr=np.asarray(d["binary_corr"], dtype=float))


def _split(x: np.ndarray, nc: int) -> tuple[np.ndarray, np.ndarray]:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return x[:, :nc], x[:, nc:]


def _check_dims(params: KernelParams, x: np.ndarray) -> None:
    want = params.n_continuous + params.n_binary
    if np.atleast_2d(x).shape[1] != want:
        raise ValueError(f"point dimension {np.atleast_2d(x).shape[1]} does not match "
                         f"kernel dimension {want}")


def kernel_eval(params: KernelParams, a: np.ndarray, b: np.ndarray) -> float:
    """Covariance between two single points."""
    _check_dims(params, a)
    _check_dims(params, b)
    return float(cross_cov(params, np.atleast_2d(a), np.atleast_2d(b))[0, 0])


def _sq_dist_scaled(ac: np.ndarray, bc: np.ndarray, lengthscales: np.ndarray) -> np.ndarray:
    """Sum_i (a_i - b_i)^2 / l_i^2 for all row pairs, via the dot-product expansion."""
    if ac.shape[1] == 0:
        return np.zeros((ac.shape[0], bc.shape[0]))
    a = ac / lengthscales
    b = bc / lengthscales
    a2 = np.sum(a * a, axis=1)[:, None]
    b2 = np.sum(b * b, axis=1)[None, :]
    d2 = a2 + b2 - 2.0 * (a @ b.T)
    np.maximum(d2, 0.0, out=d2)
    return d2


def _binary_penalty(ab: np.ndarray, bb: np.ndarray, phi: np.ndarray) -> np.ndarray:
    if ab.shape[1] == 0:
        return np.zeros((ab.shape[0], bb.shape[0]))
    pen = np.zeros((ab.shape[0], bb.shape[0]))
    for j in range(ab.shape[1]):
        pen += phi[j] * (ab[:, j][:, None] != bb[:, j][None, :])
    return pen


def cross_cov(params: KernelParams, xa: np.ndarray, xb: np.ndarray) -> np.ndarray:
    """Covariance matrix between two sets of unit-scale rows."""
    _check_dims(params, xa)
    _check_dims(params, xb)
    nc = params.n_continuous
    ac, ab = _split(xa, nc)
    bc, bb = _split(xb, nc)
    expo = _sq_dist_scaled(ac, bc, params.lengthscales) + _binary_penalty(ab, bb, params.binary_corr)
    return params.alpha2 * np.exp(-expo)


def gram(params: KernelParams, x: np.ndarray) -> np.ndarray:
    """Symmetric covariance matrix of one set of rows, exact alpha2 diagonal."""
    K = cross_cov(params, x, x)
    np.fill_diagonal(K, params.alpha2)
    return 0.5 * (K + K.T)


def gram_gradients(params: KernelParams, x: np.ndarray, K: np.ndarray) -> list[np.ndarray]:
    """dK/d(log theta) for theta = (alpha2, lengthscales..., binary_corr...).

    Returned in the same order as KernelParams.to_log_vector.
    """
    nc = params.n_continuous
    xc, xb = _split(x, nc)
    grads = [K.copy()]  # d/d log alpha2 = K
    for i in range(nc):
        d2 = (xc[:, i][:, None] - xc[:, i][None, :]) ** 2 / params.lengthscales[i] ** 2
        grads.append(K * (2.0 * d2))
    for j in range(params.n_binary):
        mism = (xb[:, j][:, None] != xb[:, j][None, :]).astype(float)
        grads.append(K * (-params.binary_corr[j] * mism))
    return grads


# ---------------------------------------------------------------------------
# Hyperparameter priors: Half-Normal(0,1) on the process variance and on each
# binary penalty, Inverse-Gamma(5,5) on each lengthscale.
# ---------------------------------------------------------------------------

_IG_SHAPE = 5.0
_IG_SCALE = 5.0
_HN_LOGCONST = 0.5 * np.log(2.0 / np.pi)


def half_normal_logpdf(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return np.where(v >= 0, _HN_LOGCONST - 0.5 * v * v, -np.inf)


def inverse_gamma_logpdf(v: np.ndarray, shape: float = _IG_SHAPE, scale: float = _IG_SCALE) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        lp = shape * np.log(scale) - gammaln(shape) - (shape + 1.0) * np.log(v) - scale / v
    return np.where(v > 0, lp, -np.inf)


@dataclass(frozen=True)
class HyperPriors:
    """Fixed prior family for kernel hyperparameters."""

    ig_shape: float = _IG_SHAPE
    ig_scale: float = _IG_SCALE

    def log_density(self, params: KernelParams) -> float:
        lp = float(half_normal_logpdf(params.alpha2))
        lp += float(np.sum(inverse_gamma_logpdf(params.lengthscales, self.ig_shape, self.ig_scale)))
        lp += float(np.sum(half_normal_logpdf(params.binary_corr)))
        return lp

    def log_density_grad(self, params: KernelParams) -> np.ndarray:
        """Gradient of the log prior density wrt log-parameters."""
        g_alpha = -params.alpha2 ** 2  # d/du log HN(e^u) = -v^2
        g_len = -(self.ig_shape + 1.0) + self.ig_scale / params.lengthscales
        g_phi = -params.binary_corr ** 2
        return np.concatenate([[g_alpha], g_len, g_phi])

    def sample(self, rng: np.random.Generator, n_continuous: int, n_binary: int) -> KernelParams:
        alpha2 = float(np.abs(rng.normal(0.0, 1.0)))
        # inverse-gamma draw via its gamma reciprocal
        ls = self.ig_scale / rng.gamma(self.ig_shape, 1.0, size=n_continuous)
        phi = np.abs(rng.normal(0.0, 1.0, size=n_binary))
        return KernelParams(alpha2=max(alpha2, 1e-6), lengthscales=ls,
                            binary_corr=np.maximum(phi, 1e-6))
