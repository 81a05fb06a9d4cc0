"""Independent numerical oracles: seeded samplers, Monte-Carlo MSE, numeric KL and grid MMSE.

Randomness comes from numpy's counter-based Philox generator. Each call derives
its stream from ``SeedSequence(seed, spawn_key=(stream,))`` so different
quantities drawn under one seed never share random numbers, and large draws
are produced in fixed-size chunks so results do not depend on how the work is
split.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import (
    DimensionMismatch,
    DomainError,
    GridTooCoarse,
    NotNormalized,
    NotPositiveSemidefinite,
    QuadratureFailure,
)
from .divergences import (
    BallChannelSpec,
    GGChannelSpec,
    ball_second_moment,
    gg_best_sigma,
    gg_divergence,
    gg_logpdf,
    gg_scale,
    uniform_ball_divergence,
)
from .gaussian import LinearEstimator, apply_estimator, _frozen

CHUNK = 1_000_000
KL_ABS_TOL = 1e-8
NORMALIZATION_TOL = 1e-6


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(int(stream),))))


@dataclass(frozen=True)
class SampleBatch:
    draws: np.ndarray
    seed: int
    distribution_tag: str

    @property
    def n(self) -> int:
        return self.draws.shape[0]


@dataclass(frozen=True)
class McEstimate:
    value: float
    std_error: float
    n: int

    def within(self, target: float, sigmas: float = 3.0) -> bool:
        return abs(self.value - target) <= sigmas * self.std_error

    def z_score(self, target: float) -> float:
        if self.std_error == 0.0:
            return 0.0 if self.value == target else math.inf
        return (self.value - target) / self.std_error


def mc_mean(values: np.ndarray) -> McEstimate:
    values = np.asarray(values, dtype=float)
    n = values.size
    if n < 1:
        raise DimensionMismatch("need at least one sample")
    se = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return McEstimate(float(np.mean(values)), se, n)


class _Accumulator:
    """Streaming mean / standard error over chunks (Chan's parallel update)."""

    def __init__(self):
        self.n = 0
        self.mean = 0.0
        self.m2 = 0.0

    def add(self, values: np.ndarray) -> None:
        nb = values.size
        if nb == 0:
            return
        mb = float(np.mean(values))
        m2b = float(np.sum((values - mb) ** 2))
        delta = mb - self.mean
        total = self.n + nb
        self.mean += delta * nb / total
        self.m2 += m2b + delta * delta * self.n * nb / total
        self.n = total

    def result(self) -> McEstimate:
        se = math.sqrt(self.m2 / (self.n - 1) / self.n) if self.n > 1 else 0.0
        return McEstimate(self.mean, se, self.n)


def _chunks(n: int):
    start = 0
    while start < n:
        size = min(CHUNK, n - start)
        yield size
        start += size


# -- samplers ------------------------------------------------------------------


def _cov_factor(cov: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        w, v = np.linalg.eigh(cov)
        if w[0] < -1e-10 * max(abs(w[-1]), 1e-300):
            raise NotPositiveSemidefinite("covariance is not positive semidefinite") from None
        return v * np.sqrt(np.clip(w, 0.0, None))


def sample_gaussian(mean, cov, n: int, seed: int, stream: int = 0) -> SampleBatch:
    """``n`` draws from ``N(mean, cov)`` via a Cholesky (or eigen, if singular) factor."""
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    d = mean.size
    if cov.shape != (d, d):
        raise DimensionMismatch("mean and cov dimensions differ")
    factor = _cov_factor(0.5 * (cov + cov.T))
    rng = make_rng(seed, stream)
    z = rng.standard_normal((int(n), d))
    return SampleBatch(_frozen(mean + z @ factor.T), int(seed), f"gaussian(d={d})")


def sample_gg(a: float, p: float, n: int, seed: int, stream: int = 0) -> SampleBatch:
    """``GG(a, p)`` draws as ``sign * a * G^(1/p)`` with ``G ~ Gamma(1/p, 1)``."""
    rng = make_rng(seed, stream)
    g = rng.gamma(1.0 / p, 1.0, size=int(n))
    sign = np.where(rng.random(int(n)) < 0.5, -1.0, 1.0)
    x = sign * a * g ** (1.0 / p)
    return SampleBatch(_frozen(x[:, None]), int(seed), f"gg(a={a},p={p})")


def _ball_draws(rng: np.random.Generator, c: np.ndarray, r: float, n: int) -> np.ndarray:
    k = c.size
    direction = rng.standard_normal((n, k))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    radius = r * rng.random(n) ** (1.0 / k)
    return c + direction * radius[:, None]


def sample_ball_uniform(c, r: float, k: int, n: int, seed: int, stream: int = 0) -> SampleBatch:
    """Uniform draws on the K-ball: Gaussian direction times radius ``r U^(1/K)``."""
    c = np.atleast_1d(np.asarray(c, dtype=float))
    if c.size == 1 and k > 1:
        c = np.full(k, float(c[0]))
    if c.size != k:
        raise DimensionMismatch(f"center must have {k} entries")
    rng = make_rng(seed, stream)
    return SampleBatch(_frozen(_ball_draws(rng, c, r, int(n))), int(seed), f"ball(k={k},r={r})")


# -- Monte-Carlo estimates ----------------------------------------------------


def empirical_mse(estimator: LinearEstimator, batch_xy: SampleBatch, k: int, m: int) -> McEstimate:
    """Mean and standard error of ``||x - f(y)||^2`` over the rows of a joint batch."""
    draws = batch_xy.draws
    if draws.ndim != 2 or draws.shape[1] != k + m:
        raise DimensionMismatch(f"batch must have k+m={k + m} columns, got {draws.shape}")
    if estimator.input_mean.size != k or estimator.output_mean.size != m:
        raise DimensionMismatch("estimator dimensions do not match k and m")
    err = draws[:, :k] - apply_estimator(estimator, draws[:, k:])
    return mc_mean(np.sum(err * err, axis=1))


def mc_kl_uniform_ball(k: int, r: float = 1.0, n: int = 10_000_000, seed: int = 0) -> McEstimate:
    """Monte-Carlo ``D(U_ball || N(c, r^2/(K+2) I))`` (center irrelevant, taken at 0)."""
    from scipy.special import gammaln

    log_vol = 0.5 * k * math.log(math.pi) + k * math.log(r) - gammaln(0.5 * k + 1.0)
    var = r * r / (k + 2)
    rng = make_rng(seed, 1)
    acc = _Accumulator()
    center = np.zeros(k)
    for size in _chunks(int(n)):
        x = _ball_draws(rng, center, r, size)
        log_q = -0.5 * k * math.log(2.0 * math.pi * var) - 0.5 * np.sum(x * x, axis=1) / var
        acc.add(-log_vol - log_q)
    return acc.result()


def mc_log_second_moment(ck: float, r: float, k: int, n: int = 10_000_000, seed: int = 0) -> McEstimate:
    """Monte-Carlo ``E[log X_1^2]`` for the first coordinate of the uniform K-ball law."""
    rng = make_rng(seed, 2)
    acc = _Accumulator()
    center = np.zeros(k)
    center[0] = ck
    for size in _chunks(int(n)):
        x = _ball_draws(rng, center, r, size)
        acc.add(np.log(x[:, 0] ** 2))
    return acc.result()


def mc_mult_channel_kl(spec: BallChannelSpec, n: int = 10_000_000, seed: int = 0) -> McEstimate:
    """Monte-Carlo joint KL of ``(X, X*N)`` from the independent Gaussian approximation.

    Evaluates ``log p(x, y) - log q(x, y)`` on exact joint draws, with
    ``p(y | x) = N(0, diag(x^2))`` and ``q = N(c, r^2/(K+2) I) x N(0, diag(E[X^2]))``.
    """
    from scipy.special import gammaln

    k, r, c = spec.k, spec.r, spec.c
    log_vol = 0.5 * k * math.log(math.pi) + k * math.log(r) - gammaln(0.5 * k + 1.0)
    var_x = spec.input_variance
    var_y = np.array([ball_second_moment(ck, r, k) for ck in c])
    rng = make_rng(seed, 3)
    acc = _Accumulator()
    for size in _chunks(int(n)):
        x = _ball_draws(rng, c, r, size)
        y = x * rng.standard_normal((size, k))
        log_p = -log_vol + np.sum(-0.5 * np.log(2.0 * math.pi * x * x) - 0.5 * (y / x) ** 2, axis=1)
        log_q = (
            -0.5 * k * math.log(2.0 * math.pi * var_x)
            - 0.5 * np.sum((x - c) ** 2, axis=1) / var_x
            + np.sum(-0.5 * np.log(2.0 * math.pi * var_y) - 0.5 * y * y / var_y, axis=1)
        )
        acc.add(log_p - log_q)
    return acc.result()


# -- quadrature oracles ---------------------------------------------------------


def numeric_kl_1d(
    logp: Callable[[float], float],
    logq: Callable[[float], float],
    support: tuple[float, float],
    breakpoints: Sequence[float] = (0.0,),
) -> float:
    """``integral p (log p - log q)`` over ``support`` by adaptive quadrature.

    The support is split at ``breakpoints`` inside it (kinks and cusps of the
    densities). Raises NotNormalized if ``p`` does not integrate to 1 within 1e-6.
    """
    lo, hi = map(float, support)
    cuts = [lo] + sorted(b for b in breakpoints if lo < b < hi) + [hi]

    def integrate_pieces(f):
        total, err = 0.0, 0.0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            for a, b in zip(cuts[:-1], cuts[1:]):
                v, e = integrate.quad(f, a, b, epsabs=1e-12, epsrel=1e-12, limit=500)
                total += v
                err += e
        return total, err

    def density(x):
        return math.exp(logp(x))

    def integrand(x):
        lp = logp(x)
        if lp == -math.inf:
            return 0.0
        return math.exp(lp) * (lp - logq(x))

    mass, _ = integrate_pieces(density)
    if abs(mass - 1.0) > NORMALIZATION_TOL:
        raise NotNormalized(f"density integrates to {mass:.10g}")
    value, err = integrate_pieces(integrand)
    if not math.isfinite(value) or err > KL_ABS_TOL:
        raise QuadratureFailure(f"KL quadrature error estimate {err:.3g} exceeds {KL_ABS_TOL}")
    return value


@dataclass(frozen=True)
class GridSpec:
    """Tensor grid ``[x_lo, x_hi] x [y_lo, y_hi]`` with ``n`` points per axis."""

    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float
    n: int = 2001
    max_n: int = 4001
    rtol: float = 1e-4

    def axes(self, n: int):
        return np.linspace(self.x_lo, self.x_hi, n), np.linspace(self.y_lo, self.y_hi, n)


def _trap_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


def _grid_mmse(x: np.ndarray, y: np.ndarray, dens: np.ndarray) -> float:
    wx = _trap_weights(x.size, x[1] - x[0])
    wy = _trap_weights(y.size, y[1] - y[0])
    weighted = dens * wx[:, None]
    p_y = weighted.sum(axis=0)
    keep = p_y > 0.0
    cond_mean = np.zeros_like(p_y)
    cond_mean[keep] = (x @ weighted)[keep] / p_y[keep]
    resid = (x[:, None] - cond_mean[None, :]) ** 2
    # integral of Var(X | y) p(y) dy = sum over the grid of (x - E[X|y])^2 p(x, y)
    return float(np.sum((resid * weighted).sum(axis=0) * wy))


def numeric_mmse_1d(joint_density: Callable[[np.ndarray, np.ndarray], np.ndarray], grid: GridSpec) -> float:
    """MMSE of a scalar pair ``(X, Y)`` from its joint density on a tensor grid.

    Computes ``integral Var(X | y) p(y) dy`` with trapezoidal weights and accepts
    the result once the same quantity on every other grid point agrees to
    ``grid.rtol``; otherwise the grid is refined (``n -> 2n - 1``) up to ``max_n``.
    """
    n = grid.n if grid.n % 2 == 1 else grid.n + 1
    while True:
        x, y = grid.axes(n)
        dens = joint_density(x[:, None], y[None, :])
        full = _grid_mmse(x, y, dens)
        half = _grid_mmse(x[::2], y[::2], dens[::2, ::2])
        if abs(full - half) <= grid.rtol * abs(full):
            return full
        if 2 * n - 1 > grid.max_n:
            raise GridTooCoarse(
                f"grid MMSE not converged at n={n}: {full:.8g} vs {half:.8g} at half resolution"
            )
        n = 2 * n - 1


def gg_channel_grid(spec: GGChannelSpec, n: int = 2001) -> GridSpec:
    """Default grid: +-8 matched standard deviations, +-20 for heavy tails (shape < 1/2)."""
    sx = math.sqrt(spec.var_x)
    sy = math.sqrt(spec.var_x + spec.var_n)
    width = 20.0 if min(spec.p, spec.q) < 0.5 else 8.0
    return GridSpec(-width * sx, width * sx, -width * sy, width * sy, n=n)


def gg_numeric_mmse(spec: GGChannelSpec, grid: GridSpec | None = None) -> float:
    """Grid MMSE of ``Y = X + N`` with GG input and noise."""
    grid = grid or gg_channel_grid(spec)

    def joint(x, y):
        return np.exp(gg_logpdf(x, spec.a, spec.p) + gg_logpdf(y - x, spec.b, spec.q))

    return numeric_mmse_1d(joint, grid)


# -- scheduled suites ---------------------------------------------------------------

SUITES = ("kl", "mc", "oracle")
MC_SIGMAS = 3.0


@dataclass(frozen=True)
class CheckResult:
    """One scheduled comparison: ``residual <= threshold`` passes."""

    suite: str
    name: str
    value: float
    target: float
    residual: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.threshold)

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "name": self.name,
            "value": self.value,
            "target": self.target,
            "residual": self.residual,
            "threshold": self.threshold,
            "passed": self.passed,
        }


def _abs_check(suite, name, value, target, tol) -> CheckResult:
    return CheckResult(suite, name, float(value), float(target), abs(float(value) - float(target)), tol)


def _mc_check(suite, name, est: McEstimate, target) -> CheckResult:
    # residual in standard errors, threshold in standard errors
    return CheckResult(suite, name, est.value, float(target), abs(est.z_score(target)), MC_SIGMAS)


def _std_normal_logpdf(var: float):
    return lambda x: -0.5 * x * x / var - 0.5 * math.log(2.0 * math.pi * var)


def gg_numeric_divergence(p: float) -> float:
    """``numeric_kl_1d`` of unit-variance ``GG(., p)`` against ``N(0, 1)``."""
    a = gg_scale(1.0, p)
    width = 1e3 if p < 1.0 else 40.0
    return numeric_kl_1d(lambda x: float(gg_logpdf(x, a, p)), _std_normal_logpdf(1.0), (-width, width), (0.0, -a, a))


def ball_numeric_divergence_k1() -> float:
    """``numeric_kl_1d`` of ``U[-1, 1]`` against ``N(0, 1/3)``."""
    return numeric_kl_1d(lambda x: -math.log(2.0), _std_normal_logpdf(1.0 / 3.0), (-1.0, 1.0), ())


def _suite_kl(seed: int) -> list[CheckResult]:
    out = []
    for p in (0.5, 1.0, 2.0, 4.0, 32.0):
        out.append(_abs_check("kl", f"d_G({p:g}) vs quadrature", gg_divergence(p), gg_numeric_divergence(p), 1e-6))
    out.append(_abs_check("kl", "d_G(2) = 0", gg_divergence(2.0), 0.0, 1e-12))
    out.append(_abs_check("kl", "d_U(1) vs quadrature", uniform_ball_divergence(1), ball_numeric_divergence_k1(), 1e-6))
    est = mc_kl_uniform_ball(2, 1.0, 10_000_000, seed)
    out.append(_mc_check("kl", "d_U(2) vs Monte-Carlo (1e7)", est, uniform_ball_divergence(2)))
    return out


def _suite_mc(seed: int) -> list[CheckResult]:
    from .bounds import mmse_bounds
    from .gaussian import correlated_signal_reference, gaussian_mmse, least_favorable_cov, lmmse_estimator

    n = 1_000_000
    out = []
    z = sample_gaussian([0.0], [[1.0]], n, seed, stream=10).draws[:, 0]
    out.append(_mc_check("mc", "N(0,1) sample mean", mc_mean(z), 0.0))
    out.append(_mc_check("mc", "N(0,1) sample variance", mc_mean(z * z), 1.0))
    for i, p in enumerate((0.5, 1.0, 4.0)):
        x = sample_gg(1.0, p, n, seed, stream=20 + i).draws[:, 0]
        out.append(_mc_check("mc", f"GG(1,{p:g}) second moment", mc_mean(x * x), gg_best_sigma(1.0, p)))
    c = np.array([3.0, -1.0, 0.5])
    ball = sample_ball_uniform(c, 2.0, 3, n, seed, stream=30).draws
    far = float(np.max(np.linalg.norm(ball - c, axis=1)))
    out.append(CheckResult("mc", "ball draws inside radius", far, 2.0, max(far - 2.0, 0.0), 0.0))
    out.append(_mc_check("mc", "ball K=3 E[X_1^2]", mc_mean(ball[:, 0] ** 2), 9.0 + 4.0 / 5.0))

    ref = correlated_signal_reference(k=1, snr_db=3.0)
    est = lmmse_estimator(ref)
    res = mmse_bounds(ref, 0.5)
    cases = (("reference", ref.cov, gaussian_mmse(ref)),
             ("least favorable (upper)", least_favorable_cov(ref, res.gamma_minus), res.upper),
             ("most favorable (lower)", least_favorable_cov(ref, res.gamma_plus), res.lower))
    for i, (label, cov, target) in enumerate(cases):
        batch = sample_gaussian(ref.mean, cov, n, seed, stream=40 + i)
        out.append(_mc_check("mc", f"MSE of f0 under {label}", empirical_mse(est, batch, 1, 1), target))
    return out


def _suite_oracle(seed: int) -> list[CheckResult]:
    from .bounds import flat_spectrum_bounds, mmse_bounds
    from .divergences import gg_lower_bound
    from .gaussian import partition_reference
    from .lambertw import lambert_w

    out = []
    rho, sx = 0.6, 1.5
    cov = np.array([[sx * sx, rho * sx], [rho * sx, 1.0]])
    inv = np.linalg.inv(cov)
    norm = 1.0 / (2.0 * math.pi * math.sqrt(np.linalg.det(cov)))

    def gauss_joint(x, y):
        return norm * np.exp(-0.5 * (inv[0, 0] * x * x + 2 * inv[0, 1] * x * y + inv[1, 1] * y * y))

    value = numeric_mmse_1d(gauss_joint, GridSpec(-8 * sx, 8 * sx, -8.0, 8.0))
    out.append(_abs_check("oracle", "grid MMSE, correlated Gaussian", value, (1 - rho**2) * sx * sx, 1e-5))
    for p, q in ((2.0, 2.0), (1.0, 2.0), (1.0, 1.0), (4.0, 1.0)):
        spec = GGChannelSpec.from_variances(1.0, p, 1.0, q)
        value = gg_numeric_mmse(spec)
        if p == q == 2.0:
            out.append(_abs_check("oracle", "grid MMSE, GG(2)+GG(2)", value, 0.5, 1e-4))
        else:
            lower = gg_lower_bound(spec)
            # distance outside [lower, 1]; zero when sandwiched
            gap = max(lower - value, value - 1.0, 0.0)
            out.append(CheckResult("oracle", f"GG({p:g})+GG({q:g}) grid MMSE in [lower, 1]", value, lower, gap, 0.0))

    rng = make_rng(seed, 50)
    for i in range(5):
        k = int(rng.integers(1, 33))
        xi0 = float(rng.uniform(0.1, 5.0))
        eps = float(rng.uniform(0.01, 10.0))
        lo, hi = flat_spectrum_bounds(xi0, k, eps)
        ref = partition_reference(np.zeros(2 * k), np.block([[np.eye(k) * (xi0 + 1), np.eye(k)], [np.eye(k), np.eye(k)]]), k, k)
        res = mmse_bounds(ref, eps)
        rel = max(abs(res.lower - lo) / lo, abs(res.upper - hi) / hi)
        out.append(CheckResult("oracle", f"flat closed form vs root-find #{i}", res.lower, lo, rel, 1e-9))
    worst = 0.0
    for x in np.concatenate([-np.exp(-1.0) * rng.random(500), np.exp(rng.uniform(-20, 20, 500))]):
        for branch in (0, -1):
            if branch == -1 and x >= 0:
                continue
            w = lambert_w(branch, x)
            worst = max(worst, abs(w * math.exp(w) - x) / max(abs(x), 1e-300))
    out.append(CheckResult("oracle", "Lambert W relative residual", worst, 0.0, worst, 1e-13))
    return out


def run_suite(suite: str = "all", seed: int = 42) -> list[CheckResult]:
    """Run one scheduled suite (``kl``, ``mc``, ``oracle``) or ``all`` in a fixed order."""
    runners = {"kl": _suite_kl, "mc": _suite_mc, "oracle": _suite_oracle}
    if suite == "all":
        names = list(SUITES)
    elif suite in runners:
        names = [suite]
    else:
        raise DomainError(f"unknown suite {suite!r}; choose from kl, mc, oracle, all")
    results = []
    for name in names:
        results.extend(runners[name](int(seed)))
    return results
