"""MMSE bounds over a KL divergence ball around a Gaussian reference.

For a reference with MMSE-matrix eigenvalues ``xi_1 >= ... >= xi_K`` and radius
``eps``, every joint distribution within KL distance ``eps`` has

    sum_k xi_k / (1 + g_plus xi_k) <= mmse <= sum_k xi_k / (1 + g_minus xi_k)

where ``g_plus > 0 > g_minus`` solve ``sum_k phi(g xi_k) = 2 eps`` and
``phi(t) = log(1 + t) - t / (1 + t)``. Both sides are attained by Gaussians
(see :func:`mmse_kl.gaussian.least_favorable_cov`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.optimize import brentq

from .errors import AllZeroSpectrum, DomainError, GammaOutOfRange
from .gaussian import GaussianReference, Spectrum, schur_complement, spectrum as _spectrum
from .lambertw import lambert_w, omega

Branch = Literal["plus", "minus"]

__all__ = [
    "BoundsResult",
    "PhiEquation",
    "phi",
    "gamma_brackets",
    "solve_gamma",
    "bound_value",
    "mmse_bounds",
    "bounds_from_spectrum",
    "flat_spectrum_bounds",
    "lambert_w",
    "omega",
]

# below this |t|, phi is summed as sum_{n>=2} (-1)^n (n-1)/n t^n
_PHI_SERIES_CUTOFF = 1e-3
BRACKET_GUARD = 0.1


def phi(t: float) -> float:
    """``log(1 + t) - t / (1 + t)`` for ``t > -1``; nonnegative with its minimum 0 at t = 0."""
    t = float(t)
    if not t > -1.0:
        raise DomainError(f"phi is defined for t > -1, got {t!r}")
    if abs(t) < _PHI_SERIES_CUTOFF:
        # log1p(t) and t/(1+t) agree to first order; sum the series instead
        acc = 0.0
        power = -t
        for n in range(2, 8):
            power *= -t
            acc += (n - 1) / n * power
        return acc
    return math.log1p(t) - t / (1.0 + t)


def _phi_sum(values: np.ndarray, gamma: float) -> float:
    return math.fsum(phi(gamma * x) for x in values)


def _check_branch(branch) -> str:
    if branch in ("plus", "+", 1):
        return "plus"
    if branch in ("minus", "-", -1):
        return "minus"
    raise DomainError(f"branch must be 'plus' or 'minus', got {branch!r}")


def _as_spectrum(spec) -> Spectrum:
    return spec if isinstance(spec, Spectrum) else Spectrum.from_values(spec)


@dataclass(frozen=True)
class PhiEquation:
    """The root equation ``sum_k phi(gamma xi_k) = target`` with ``target = 2 eps``."""

    spectrum: Spectrum
    target: float

    def __post_init__(self):
        if not self.target >= 0.0:
            raise DomainError(f"target must be nonnegative, got {self.target!r}")

    def residual(self, gamma: float) -> float:
        return _phi_sum(self.spectrum.nonzero, gamma) - self.target


@dataclass(frozen=True)
class BoundsResult:
    epsilon: float
    gamma_plus: float
    gamma_minus: float
    lower: float
    upper: float
    reference_mmse: float

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "gamma_plus": self.gamma_plus,
            "gamma_minus": self.gamma_minus,
            "lower": self.lower,
            "upper": self.upper,
            "reference_mmse": self.reference_mmse,
        }


def _gamma_xi(branch_index: int, t: float) -> float:
    """Root ``s`` of ``phi(s) = 2 t`` on the given branch, via ``(1 - w) / w``."""
    w = omega(branch_index, t)
    return (1.0 - w) / w


def gamma_brackets(spec, eps: float, branch: Branch) -> tuple[float, float]:
    """Interval guaranteed to contain ``gamma_plus`` or ``gamma_minus``.

    Uses ``phi(g xi_1) <= sum_k phi(g xi_k) <= K phi(g xi_1)`` with K the number
    of nonzero eigenvalues.
    """
    branch = _check_branch(branch)
    spec = _as_spectrum(spec)
    eps = float(eps)
    if not eps > 0.0 or not math.isfinite(eps):
        raise DomainError(f"brackets need eps > 0, got {eps!r}")
    values = spec.nonzero
    if values.size == 0:
        raise DomainError("brackets are undefined for an all-zero spectrum")
    k = values.size
    top = float(values[0])
    if branch == "plus":
        return _gamma_xi(0, eps / k) / top, _gamma_xi(0, eps) / top
    return _gamma_xi(-1, eps) / top, _gamma_xi(-1, eps / k) / top


def solve_gamma(spec, eps: float, branch: Branch) -> float:
    """Solve ``sum_k phi(gamma xi_k) = 2 eps`` on the requested branch.

    Zero eigenvalues do not enter the sum. ``eps = 0`` returns 0. Raises
    AllZeroSpectrum when ``eps > 0`` and every eigenvalue is zero.
    """
    branch = _check_branch(branch)
    spec = _as_spectrum(spec)
    eps = float(eps)
    if not eps >= 0.0 or not math.isfinite(eps):
        raise DomainError("epsilon must be nonnegative")
    if eps == 0.0:
        return 0.0
    values = spec.nonzero
    if values.size == 0:
        raise AllZeroSpectrum("every eigenvalue is zero; no root exists for eps > 0")
    top = float(values[0])
    target = 2.0 * eps

    def g(gamma):
        return _phi_sum(values, gamma) - target

    lo, hi = gamma_brackets(spec, eps, branch)
    if branch == "plus":
        a, b = lo * (1.0 - BRACKET_GUARD), hi * (1.0 + BRACKET_GUARD)
        while g(b) < 0.0:
            b *= 2.0
        if g(a) > 0.0:
            a = 0.0
    else:
        # the open side is -1/xi_1; only move a fraction of the remaining gap towards it
        a = (-1.0 + (1.0 + lo * top) * (1.0 - BRACKET_GUARD)) / top
        b = hi * (1.0 - BRACKET_GUARD)
        while g(a) < 0.0:
            a = (-1.0 + (1.0 + a * top) * 0.5) / top
        if g(b) > 0.0:
            b = 0.0
    ga, gb = g(a), g(b)
    if ga == 0.0:
        return a
    if gb == 0.0:
        return b
    return brentq(g, a, b, xtol=1e-300, rtol=4.0 * np.finfo(float).eps, maxiter=500)


def bound_value(spec, gamma: float) -> float:
    """``sum_k xi_k / (1 + gamma xi_k)``: the MMSE of ``U = sqrt(gamma) X + N`` for gamma > 0."""
    spec = _as_spectrum(spec)
    gamma = float(gamma)
    values = spec.nonzero
    if values.size and (not math.isfinite(gamma) or gamma * values[0] <= -1.0):
        raise GammaOutOfRange(f"gamma={gamma!r} must exceed -1/xi_max")
    return math.fsum(x / (1.0 + gamma * x) for x in values)


def mmse_bounds(ref: GaussianReference, eps: float) -> BoundsResult:
    """Lower and upper MMSE bounds over the KL ball of radius ``eps`` around ``ref``."""
    eps = float(eps)
    if not eps >= 0.0 or not math.isfinite(eps):
        raise DomainError("epsilon must be nonnegative")
    spec = _spectrum(schur_complement(ref))
    return bounds_from_spectrum(spec, eps)


def bounds_from_spectrum(spec, eps: float) -> BoundsResult:
    spec = _as_spectrum(spec)
    reference = math.fsum(spec.nonzero)
    if eps == 0.0 or spec.nonzero.size == 0:
        return BoundsResult(eps, 0.0, 0.0, reference, reference, reference)
    g_plus = solve_gamma(spec, eps, "plus")
    g_minus = solve_gamma(spec, eps, "minus")
    lower = bound_value(spec, g_plus)
    upper = bound_value(spec, g_minus)
    return BoundsResult(eps, g_plus, g_minus, lower, upper, reference)


def flat_spectrum_bounds(xi0: float, k: int, eps: float) -> tuple[float, float]:
    """Closed-form bounds ``(K xi0 omega_0(eps/K), K xi0 omega_-1(eps/K))`` for ``Xi0 = xi0 I``."""
    xi0, eps = float(xi0), float(eps)
    if not xi0 > 0.0 or int(k) != k or k < 1 or not eps >= 0.0:
        raise DomainError(f"need xi0 > 0, integer k >= 1 and eps >= 0; got {xi0}, {k}, {eps}")
    total = k * xi0
    return total * omega(0, eps / k), total * omega(-1, eps / k)
