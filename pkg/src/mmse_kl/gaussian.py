"""Block Gaussian reference distributions and their MMSE algebra.

A reference ``P0 = N(mu0, Sigma0)`` on ``(X, Y)`` with ``X`` of dimension ``k`` and
``Y`` of dimension ``m`` is stored with the covariance partitioned as::

    Sigma0 = [[A0,   B0],
              [B0.T, C0]]

Everything the bounds need follows from the Schur complement
``Xi0 = A0 - B0 C0^{-1} B0.T`` (the MMSE matrix) and its spectrum.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve

from .errors import (
    AsymmetricInput,
    DimensionMismatch,
    GammaOutOfRange,
    NotPositiveDefinite,
    NotPositiveSemidefinite,
)
from .linalg import cholesky, chol_logdet, chol_solve, jacobi_eigh, symmetrize

ASYMMETRY_RTOL = 1e-8
PSD_RTOL = 1e-10
EIGEN_CLAMP_RTOL = 1e-10


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GaussianReference:
    """Jointly Gaussian reference ``N(mean, cov)`` for the pair ``(X, Y)``."""

    mean: np.ndarray
    cov: np.ndarray
    k: int
    m: int

    @property
    def mean_x(self) -> np.ndarray:
        return self.mean[: self.k]

    @property
    def mean_y(self) -> np.ndarray:
        return self.mean[self.k :]

    @property
    def a(self) -> np.ndarray:
        return self.cov[: self.k, : self.k]

    @property
    def b(self) -> np.ndarray:
        return self.cov[: self.k, self.k :]

    @property
    def c(self) -> np.ndarray:
        return self.cov[self.k :, self.k :]

    def with_cov(self, cov) -> "GaussianReference":
        return partition_reference(self.mean, cov, self.k, self.m)

    def to_dict(self) -> dict:
        return {
            "mean": self.mean.tolist(),
            "cov": self.cov.tolist(),
            "k": self.k,
            "m": self.m,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GaussianReference":
        try:
            mean, cov, k, m = data["mean"], data["cov"], data["k"], data["m"]
        except KeyError as exc:
            raise DimensionMismatch(f"reference JSON is missing field {exc.args[0]!r}") from None
        if not isinstance(k, int) or not isinstance(m, int):
            raise DimensionMismatch("k and m must be integers")
        return partition_reference(mean, cov, k, m)

    @classmethod
    def load(cls, path) -> "GaussianReference":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class MmseMatrix:
    """The MMSE matrix ``Xi0``; symmetric positive semidefinite, ``k x k``."""

    xi: np.ndarray

    @property
    def trace(self) -> float:
        return float(np.trace(self.xi))


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of an MMSE matrix, sorted descending and clamped at zero."""

    eigenvalues: np.ndarray

    def __len__(self) -> int:
        return len(self.eigenvalues)

    @property
    def largest(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def nonzero(self) -> np.ndarray:
        return self.eigenvalues[self.eigenvalues > 0.0]

    @classmethod
    def from_values(cls, values) -> "Spectrum":
        w = np.sort(np.asarray(values, dtype=float).ravel())[::-1]
        if w.size == 0:
            raise DimensionMismatch("spectrum must contain at least one eigenvalue")
        if not np.all(np.isfinite(w)) or w[-1] < 0.0:
            raise NotPositiveSemidefinite("spectrum entries must be finite and nonnegative")
        return cls(_frozen(w))


@dataclass(frozen=True)
class LinearEstimator:
    """Affine estimator ``f(y) = input_mean + gain @ (y - output_mean)``."""

    gain: np.ndarray
    input_mean: np.ndarray
    output_mean: np.ndarray

    def __call__(self, y) -> np.ndarray:
        return apply_estimator(self, y)


def partition_reference(mean, cov, k: int, m: int) -> GaussianReference:
    """Validate ``(mean, cov)`` and wrap it as a reference with blocks of size k and m.

    The covariance is symmetrized before validation. Raises DimensionMismatch,
    AsymmetricInput (relative asymmetry above 1e-8) or NotPositiveDefinite
    (``C0`` not positive definite, or ``Sigma0`` not positive semidefinite).
    """
    if int(k) != k or int(m) != m or k < 1 or m < 1:
        raise DimensionMismatch(f"k and m must be positive integers, got k={k}, m={m}")
    k, m = int(k), int(m)
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    n = k + m
    if mean.shape != (n,):
        raise DimensionMismatch(f"mean must have length k+m={n}, got shape {mean.shape}")
    if cov.shape != (n, n):
        raise DimensionMismatch(f"cov must be {n}x{n}, got shape {cov.shape}")
    if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
        raise DimensionMismatch("mean and cov must contain finite values only")

    scale = float(np.max(np.abs(cov)))
    if scale > 0 and float(np.max(np.abs(cov - cov.T))) > ASYMMETRY_RTOL * scale:
        raise AsymmetricInput("cov is not symmetric")
    cov = symmetrize(cov)

    cholesky(cov[k:, k:], "output covariance block C0")
    w = np.linalg.eigvalsh(cov)
    if w[0] < -PSD_RTOL * max(scale, 1e-300):
        raise NotPositiveDefinite(
            f"cov is not positive semidefinite (smallest eigenvalue {w[0]:.6g})"
        )
    return GaussianReference(_frozen(mean), _frozen(cov), k, m)


def schur_complement(ref: GaussianReference) -> MmseMatrix:
    """``Xi0 = A0 - B0 C0^{-1} B0.T``, the error covariance of the linear MMSE estimator."""
    b = ref.b
    xi = ref.a - b @ chol_solve(ref.c, b.T, "output covariance block C0")
    return MmseMatrix(_frozen(symmetrize(xi)))


def spectrum(xi: MmseMatrix) -> Spectrum:
    """Descending eigenvalues of ``xi`` via cyclic Jacobi.

    Eigenvalues in ``[-1e-10 * largest, 0)`` are roundoff and set to zero;
    anything more negative raises NotPositiveSemidefinite.
    """
    w = jacobi_eigh(xi.xi)
    top = float(np.max(np.abs(w))) if w.size else 0.0
    if w.size and w[-1] < -EIGEN_CLAMP_RTOL * top:
        raise NotPositiveSemidefinite(
            f"MMSE matrix has a negative eigenvalue {w[-1]:.6g}"
        )
    return Spectrum(_frozen(np.where(w < 0.0, 0.0, w)))


def lmmse_estimator(ref: GaussianReference) -> LinearEstimator:
    gain = chol_solve(ref.c, ref.b.T, "output covariance block C0").T
    return LinearEstimator(_frozen(gain), _frozen(ref.mean_x), _frozen(ref.mean_y))


def apply_estimator(est: LinearEstimator, y) -> np.ndarray:
    """Evaluate the estimator on one observation (shape ``(m,)``) or a batch ``(n, m)``."""
    y = np.asarray(y, dtype=float)
    m = est.output_mean.shape[0]
    if y.shape[-1:] != (m,) or y.ndim > 2:
        raise DimensionMismatch(f"observation must have trailing dimension {m}, got {y.shape}")
    return est.input_mean + (y - est.output_mean) @ est.gain.T


def gaussian_mmse(ref: GaussianReference) -> float:
    return schur_complement(ref).trace


def _check_gamma(xi_top: float, gamma: float) -> None:
    if not math.isfinite(gamma):
        raise GammaOutOfRange(f"gamma must be finite, got {gamma}")
    if xi_top > 0.0 and gamma * xi_top <= -1.0:
        raise GammaOutOfRange(
            f"gamma={gamma:.6g} must exceed -1/xi_max={-1.0 / xi_top:.6g}"
        )


def least_favorable_cov(ref: GaussianReference, gamma: float) -> np.ndarray:
    """Covariance of the Gaussian that attains the bound indexed by ``gamma``.

    Only the input block is changed::

        Sigma_gamma = Sigma0 - gamma * blockdiag(Xi0 (I + gamma Xi0)^{-1} Xi0, 0)

    ``gamma > 0`` shrinks the MMSE (lower bound), ``gamma < 0`` inflates it
    (upper bound); ``gamma`` must exceed ``-1/xi_max``.
    """
    gamma = float(gamma)
    if gamma == 0.0:
        return np.array(ref.cov, copy=True)
    xi = schur_complement(ref)
    _check_gamma(spectrum(xi).largest, gamma)
    x = xi.xi
    shrink = x @ chol_solve(np.eye(ref.k) + gamma * x, x, "I + gamma*Xi0")
    out = np.array(ref.cov, copy=True)
    out[: ref.k, : ref.k] -= gamma * symmetrize(shrink)
    return symmetrize(out)


def gaussian_kl(mean1, cov1, mean0, cov0) -> float:
    """KL divergence ``D(N(mean1, cov1) || N(mean0, cov0))`` in nats."""
    mean1 = np.atleast_1d(np.asarray(mean1, dtype=float))
    mean0 = np.atleast_1d(np.asarray(mean0, dtype=float))
    cov1 = np.atleast_2d(np.asarray(cov1, dtype=float))
    cov0 = np.atleast_2d(np.asarray(cov0, dtype=float))
    n = mean0.shape[0]
    if mean1.shape != (n,) or cov1.shape != (n, n) or cov0.shape != (n, n):
        raise DimensionMismatch("KL arguments have inconsistent dimensions")
    f0 = cholesky(cov0, "cov0")
    f1 = cholesky(cov1, "cov1")
    d = mean1 - mean0
    trace_term = float(np.trace(cho_solve(f0, cov1)))
    quad = float(d @ cho_solve(f0, d))
    kl = 0.5 * (trace_term - n + quad - chol_logdet(f1) + chol_logdet(f0))
    return max(kl, 0.0)


def additive_reference(sigma_x, sigma_n, mean_x=None, mean_n=None) -> GaussianReference:
    """Reference for ``Y = X + N`` with independent Gaussian ``X`` and ``N``."""
    sx = np.atleast_2d(np.asarray(sigma_x, dtype=float))
    sn = np.atleast_2d(np.asarray(sigma_n, dtype=float))
    k = sx.shape[0]
    if sx.shape != (k, k) or sn.shape != (k, k):
        raise DimensionMismatch("sigma_x and sigma_n must be square and of equal size")
    mx = np.zeros(k) if mean_x is None else np.asarray(mean_x, dtype=float)
    mn = np.zeros(k) if mean_n is None else np.asarray(mean_n, dtype=float)
    cov = np.block([[sx, sx], [sx, sx + sn]])
    return partition_reference(np.concatenate([mx, mx + mn]), cov, k, k)


def exp_decay_covariance(k: int = 10, rate: float = 0.9) -> np.ndarray:
    """Covariance with entries ``exp(-rate * |i - j|)``."""
    idx = np.arange(k)
    return np.exp(-rate * np.abs(idx[:, None] - idx[None, :]))


def correlated_signal_reference(k: int = 10, snr_db: float = 0.0, rate: float = 0.9):
    """Exponentially correlated signal in white noise; SNR is ``tr(Sigma_X) / tr(Sigma_N)``."""
    sx = exp_decay_covariance(k, rate)
    noise_var = float(np.trace(sx)) / k / 10.0 ** (snr_db / 10.0)
    return additive_reference(sx, noise_var * np.eye(k))
