"""Non-Gaussianity of the example channels and the bounds they imply.

Two channel families are covered:

* additive ``Y = X + N`` with generalized-Gaussian (GG) input and noise, where
  the joint divergence to the best additive Gaussian model splits into an
  input part and a noise part;
* multiplicative ``Y = X * N`` with ``X`` uniform on a K-ball in the positive
  orthant and ``N ~ N(0, I)``, approximated by independent Gaussians.

Gamma functions are always evaluated through ``gammaln``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from .errors import DimensionMismatch, DomainError, QuadratureFailure
from .gaussian import MmseMatrix, _frozen
from .lambertw import omega
from .linalg import chol_solve, symmetrize

Method = Literal["exact", "affine_bound"]

FISHER_INFINITE = math.inf
H_ABS_TOL = 1e-10


@dataclass(frozen=True)
class GGChannelSpec:
    """``Y = X + N`` with ``X ~ GG(a, p)`` and ``N ~ GG(b, q)``, independent."""

    a: float
    p: float
    b: float
    q: float

    def __post_init__(self):
        for name in ("a", "p", "b", "q"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise DomainError(f"GG channel parameter {name} must be positive, got {value!r}")

    @classmethod
    def from_variances(cls, var_x: float, p: float, var_n: float, q: float) -> "GGChannelSpec":
        return cls(gg_scale(var_x, p), p, gg_scale(var_n, q), q)

    @property
    def var_x(self) -> float:
        return gg_best_sigma(self.a, self.p)

    @property
    def var_n(self) -> float:
        return gg_best_sigma(self.b, self.q)


@dataclass(frozen=True)
class BallChannelSpec:
    """``Y = X * N`` with ``X`` uniform on the ball of radius ``r`` around ``c``."""

    c: np.ndarray
    r: float
    k: int

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        if int(self.k) != self.k or self.k < 1:
            raise DomainError(f"k must be a positive integer, got {self.k!r}")
        if c.size == 1 and self.k > 1:
            c = np.full(int(self.k), float(c[0]))
        if c.shape != (self.k,):
            raise DimensionMismatch(f"center must have {self.k} entries, got {c.shape}")
        if not (math.isfinite(self.r) and self.r > 0.0):
            raise DomainError(f"radius must be positive, got {self.r!r}")
        if not np.all(c > self.r):
            raise DomainError("every center coordinate must exceed the radius (ball in the positive orthant)")
        object.__setattr__(self, "c", _frozen(c))
        object.__setattr__(self, "k", int(self.k))

    @property
    def input_variance(self) -> float:
        """Per-coordinate variance of the uniform ball input, ``r^2 / (K + 2)``."""
        return self.r**2 / (self.k + 2)


@dataclass(frozen=True)
class NonGaussianity:
    """KL divergence to the best Gaussian model, with its named components."""

    epsilon: float
    components: dict = field(default_factory=dict)


def additive_mmse_matrix(sigma_x, sigma_n) -> MmseMatrix:
    """``Sigma_X (Sigma_X + Sigma_N)^{-1} Sigma_N`` for a Gaussian additive-noise reference."""
    sx = np.atleast_2d(np.asarray(sigma_x, dtype=float))
    sn = np.atleast_2d(np.asarray(sigma_n, dtype=float))
    if sx.shape != sn.shape or sx.shape[0] != sx.shape[1]:
        raise DimensionMismatch("sigma_x and sigma_n must be square matrices of equal size")
    xi = sx @ chol_solve(sx + sn, sn, "Sigma_X + Sigma_N")
    return MmseMatrix(_frozen(symmetrize(xi)))


# -- generalized Gaussian ----------------------------------------------------


def gg_logpdf(x, a: float, p: float):
    """Log density of ``GG(a, p)``: ``p / (2 a Gamma(1/p)) exp(-(|x|/a)^p)``."""
    x = np.asarray(x, dtype=float)
    return math.log(p / (2.0 * a)) - gammaln(1.0 / p) - (np.abs(x) / a) ** p


def gg_pdf(x, a: float, p: float):
    return np.exp(gg_logpdf(x, a, p))


def gg_best_sigma(a: float, p: float) -> float:
    """Variance of ``GG(a, p)``, ``a^2 Gamma(3/p) / Gamma(1/p)``; the KL-closest Gaussian has this variance."""
    return a * a * math.exp(gammaln(3.0 / p) - gammaln(1.0 / p))


def gg_scale(variance: float, p: float) -> float:
    """Scale ``a`` such that ``GG(a, p)`` has the given variance."""
    return math.sqrt(variance * math.exp(gammaln(1.0 / p) - gammaln(3.0 / p)))


def gg_divergence(p: float) -> float:
    """KL divergence from ``GG(a, p)`` to its moment-matched Gaussian; independent of ``a``."""
    if not p > 0.0:
        raise DomainError(f"shape p must be positive, got {p!r}")
    log_ratio = 0.5 * (gammaln(3.0 / p) - gammaln(1.0 / p))
    value = (
        math.log(p / math.sqrt(2.0))
        + log_ratio
        + gammaln(0.5)
        - gammaln(1.0 / p)
        + 0.5
        - 1.0 / p
    )
    # the closed form cancels exactly at p = 2; clip the roundoff there
    return 0.0 if abs(value) < 1e-15 else value


def gg_joint_nongaussianity(p: float, q: float) -> NonGaussianity:
    d_in, d_noise = gg_divergence(p), gg_divergence(q)
    return NonGaussianity(d_in + d_noise, {"input": d_in, "noise": d_noise})


def gg_lower_bound(spec: GGChannelSpec) -> float:
    vx, vn = spec.var_x, spec.var_n
    eps = gg_joint_nongaussianity(spec.p, spec.q).epsilon
    return omega(0, eps) * vx * vn / (vx + vn)


def gg_fisher_information(a: float, p: float) -> float:
    """Fisher information (location) of ``GG(a, p)``; ``math.inf`` for ``p <= 1/2``."""
    if not (a > 0.0 and p > 0.0):
        raise DomainError("GG parameters must be positive")
    if p <= 0.5:
        return FISHER_INFINITE
    return p * p / (a * a) * math.exp(gammaln(2.0 - 1.0 / p) - gammaln(1.0 / p))


def gg_crb(spec: GGChannelSpec) -> float:
    """Bayesian Cramer-Rao bound ``1 / (I_X + I_N)``; exactly 0 if either information is infinite."""
    total = gg_fisher_information(spec.a, spec.p) + gg_fisher_information(spec.b, spec.q)
    if math.isinf(total):
        return 0.0
    return 1.0 / total


def gg_entropy(a: float, p: float) -> float:
    """Differential entropy of ``GG(a, p)`` in nats."""
    if not (a > 0.0 and p > 0.0):
        raise DomainError("GG parameters must be positive")
    return math.log(2.0 * a / p) + gammaln(1.0 / p) + 1.0 / p


def low_snr_floor(h_x: float, k: int) -> float:
    """Entropy-power floor ``exp(2 h / K) / (2 pi e)`` on the MMSE as the noise grows."""
    if int(k) != k or k < 1:
        raise DomainError(f"k must be a positive integer, got {k!r}")
    return math.exp(2.0 * h_x / k) / (2.0 * math.pi * math.e)


# -- uniform input on a K-ball ------------------------------------------------


def uniform_ball_divergence(k: int) -> float:
    """KL divergence from the uniform K-ball law to its moment-matched Gaussian (radius-free)."""
    if int(k) != k or k < 1:
        raise DomainError(f"k must be a positive integer, got {k!r}")
    half = 0.5 * k
    return half - half * math.log((k + 2) / 2.0) + gammaln((k + 2) / 2.0)


def ball_marginal_pdf(x, ck: float, r: float, k: int):
    """Density of one coordinate of the uniform K-ball law; ``(1 - u)^((K-1)/2)`` shape, u = ((x-c)/r)^2."""
    if not r > 0.0:
        raise DomainError(f"radius must be positive, got {r!r}")
    x = np.asarray(x, dtype=float)
    u = ((x - ck) / r) ** 2
    b = (k + 1) / 2.0
    # Beta(1, b) density is b (1 - u)^(b - 1)
    norm = math.exp(gammaln((k + 2) / 2.0) - gammaln((k + 3) / 2.0)) / (math.sqrt(math.pi) * r)
    inside = u <= 1.0
    with np.errstate(invalid="ignore"):
        dens = np.where(inside, norm * b * np.clip(1.0 - u, 0.0, None) ** (b - 1.0), 0.0)
    return dens if dens.ndim else float(dens)


def _quad_weighted(func, lo, hi, weight, wvar):
    with warnings.catch_warnings():
        # roundoff warnings are judged by the returned error estimate
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        if weight is None:
            return integrate.quad(func, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=200)
        return integrate.quad(
            func, lo, hi, weight=weight, wvar=wvar, epsabs=1e-13, epsrel=1e-12, limit=200
        )


def h_integral(a: float, b: float) -> float:
    """``H(a, b) = integral_{-1}^{1} log(1 + a x) (1 - x^2)^(b - 1) dx`` for ``0 <= a <= 1``, ``b > 0``.

    The algebraic endpoint factor is passed to QUADPACK as a weight so that
    ``b < 1`` needs no special treatment.
    """
    if not (0.0 <= a <= 1.0) or not b > 0.0:
        raise DomainError(f"h_integral needs 0 <= a <= 1 and b > 0, got a={a!r}, b={b!r}")
    if a == 0.0:
        return 0.0
    if a == 1.0:
        # log(1 + x) is itself a QUADPACK endpoint weight
        value, err = _quad_weighted(lambda x: 1.0, -1.0, 1.0, "alg-loga", (b - 1.0, b - 1.0))
    else:
        # log(1 + a x) is singular at -1/a, a distance gap = (1 - a)/a left of the interval
        gap = (1.0 - a) / a
        if gap >= 0.5 and b >= 1.0:
            # bounded integrand; the algebraic-weight moments degrade for large b
            value, err = _quad_weighted(
                lambda x: math.log1p(a * x) * (1.0 - x * x) ** (b - 1.0), -1.0, 1.0, None, None
            )
        elif gap >= 0.5:
            value, err = _quad_weighted(
                lambda x: math.log1p(a * x), -1.0, 1.0, "alg", (b - 1.0, b - 1.0)
            )
        else:
            # work in s = 1 + x on the left so that 1 + a x = (1 - a) + a s keeps its digits
            one_minus_a = 1.0 - a
            left, e1 = _quad_weighted(
                lambda t: math.log(one_minus_a + a * t) * (2.0 - t) ** (b - 1.0),
                0.0, gap, "alg", (b - 1.0, 0.0),
            )
            right, e3 = _quad_weighted(
                lambda x: math.log1p(a * x) * (1.0 + x) ** (b - 1.0), 0.5, 1.0, "alg", (0.0, b - 1.0)
            )
            edges = [gap]
            while edges[-1] < 1.5:
                edges.append(min(4.0 * edges[-1], 1.5))
            mid, e2 = 0.0, 0.0
            for lo, hi in zip(edges[:-1], edges[1:]):
                v, e = _quad_weighted(
                    lambda t: math.log(one_minus_a + a * t) * (t * (2.0 - t)) ** (b - 1.0),
                    lo, hi, None, None,
                )
                mid += v
                e2 += e
            value, err = left + mid + right, e1 + e2 + e3
    if not (math.isfinite(value) and err <= H_ABS_TOL):
        raise QuadratureFailure(f"H({a}, {b}) error estimate {err:.3g} exceeds {H_ABS_TOL}")
    return value


def _check_method(method) -> str:
    if method not in ("exact", "affine_bound"):
        raise DomainError(f"method must be 'exact' or 'affine_bound', got {method!r}")
    return method


def ball_log_second_moment(ck: float, r: float, k: int, method: Method = "exact") -> float:
    """``E[log X_k^2]`` for one coordinate of the uniform K-ball law.

    ``affine_bound`` replaces it by ``log(c^2 - r^2)``, a strict lower bound
    from the chord of ``log`` over ``[c - r, c + r]``.
    """
    method = _check_method(method)
    if not ck > r:
        raise DomainError(f"center coordinate {ck!r} must exceed the radius {r!r}")
    if method == "affine_bound":
        return math.log(ck * ck - r * r)
    b = (k + 1) / 2.0
    coef = 2.0 / math.sqrt(math.pi) * math.exp(gammaln((k + 2) / 2.0) - gammaln(b))
    return math.log(ck * ck) + coef * h_integral(r / ck, b)


def ball_second_moment(ck: float, r: float, k: int) -> float:
    return ck * ck + r * r / (k + 2)


def mult_channel_epsilon(spec: BallChannelSpec, method: Method = "exact") -> NonGaussianity:
    """KL divergence of ``(X, X * N)`` from its independent-Gaussian approximation.

    Input part: the ball divergence; channel part: half the sum over coordinates
    of ``log E[X_k^2] - E[log X_k^2]``.
    """
    method = _check_method(method)
    d_u = uniform_ball_divergence(spec.k)
    # equal centers share one quadrature
    cache: dict = {}
    parts = []
    for ck in spec.c:
        key = float(ck)
        if key not in cache:
            cache[key] = math.log(ball_second_moment(key, spec.r, spec.k)) - ball_log_second_moment(
                key, spec.r, spec.k, method
            )
        parts.append(cache[key])
    channel = 0.5 * math.fsum(parts)
    return NonGaussianity(d_u + channel, {"input": d_u, "channel": channel})


def mult_channel_bounds(spec: BallChannelSpec, method: Method = "exact") -> tuple[float, float]:
    """``(lower, upper)`` MMSE bounds for the multiplicative channel.

    The reference has a flat MMSE spectrum ``r^2 / (K + 2)``, so the lower bound
    is ``omega_0(eps_K / K)`` times the prior variance ``K r^2 / (K + 2)``.
    """
    upper = spec.k * spec.input_variance
    eps = mult_channel_epsilon(spec, method).epsilon
    lower = omega(0, eps / spec.k) * upper
    return lower, upper
