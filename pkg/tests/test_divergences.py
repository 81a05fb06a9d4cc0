import math

import numpy as np
import pytest
from scipy import integrate
from scipy.special import beta, digamma

from mmse_kl.divergences import (
    BallChannelSpec,
    GGChannelSpec,
    additive_mmse_matrix,
    ball_log_second_moment,
    ball_marginal_pdf,
    gg_best_sigma,
    gg_crb,
    gg_divergence,
    gg_entropy,
    gg_fisher_information,
    gg_lower_bound,
    gg_pdf,
    gg_scale,
    h_integral,
    low_snr_floor,
    mult_channel_bounds,
    mult_channel_epsilon,
    uniform_ball_divergence,
)
from mmse_kl.errors import DimensionMismatch, DomainError
from mmse_kl.gaussian import additive_reference, exp_decay_covariance, schur_complement

# 40-digit mpmath quadrature
D_G = {0.5: 0.42639004347580512, 1.0: 0.072364942924700087, 4.0: 0.031692402433149551, 32.0: 0.14750741944973976}
H_CASES = [
    (0.2, 1.5, -0.0079338586136979732),
    (0.5, 1.0, -0.090457495115561545),
    (0.9, 2.5, -0.096974630288597651),
    (0.2, 50.5, -4.9055175956394189e-5),
]


@pytest.mark.parametrize("p, value", sorted(D_G.items()))
def test_gg_divergence_mpmath(p, value):
    assert gg_divergence(p) == pytest.approx(value, rel=1e-13)


def test_gg_divergence_gaussian_point():
    assert gg_divergence(2.0) == 0.0


def test_gg_density_and_variance():
    for p in (0.5, 1.0, 2.0, 4.0):
        a = gg_scale(2.0, p)
        assert gg_best_sigma(a, p) == pytest.approx(2.0, rel=1e-14)
        mass = integrate.quad(lambda x: gg_pdf(x, a, p), -np.inf, np.inf, points=None)[0]
        assert mass == pytest.approx(1.0, abs=1e-8)
    # p = 2 is N(0, a^2/2)
    assert gg_best_sigma(3.0, 2.0) == pytest.approx(4.5)


def test_gg_fisher_and_crb():
    assert gg_fisher_information(math.sqrt(2.0), 2.0) == pytest.approx(1.0, rel=1e-14)
    assert gg_fisher_information(1.0, 0.5) == math.inf
    spec = GGChannelSpec.from_variances(1.0, 2.0, 1.0, 2.0)
    assert gg_crb(spec) == pytest.approx(0.5, abs=1e-12)
    assert gg_lower_bound(spec) == pytest.approx(0.5, abs=1e-12)
    assert gg_crb(GGChannelSpec.from_variances(1.0, 0.4, 1.0, 2.0)) == 0.0
    with pytest.raises(DomainError):
        GGChannelSpec(1.0, -1.0, 1.0, 2.0)


def test_gg_entropy_gaussian_and_laplace():
    assert gg_entropy(math.sqrt(2.0), 2.0) == pytest.approx(0.5 * math.log(2 * math.pi * math.e))
    assert gg_entropy(1.0, 1.0) == pytest.approx(1.0 + math.log(2.0))


@pytest.mark.parametrize("p", [1.0, 0.6, 1.5, 4.0])
def test_stam_inequality(p):
    a = gg_scale(1.0, p)
    assert low_snr_floor(gg_entropy(a, p), 1) >= 1.0 / gg_fisher_information(a, p) - 1e-9


def test_additive_mmse_matrix_matches_schur():
    sx = exp_decay_covariance(10, 0.9)
    sn = 0.5 * np.eye(10)
    np.testing.assert_allclose(additive_mmse_matrix(sx, sn).xi, schur_complement(additive_reference(sx, sn)).xi, atol=1e-13)
    with pytest.raises(DimensionMismatch):
        additive_mmse_matrix(np.eye(2), np.eye(3))


def test_uniform_ball_divergence_values():
    assert uniform_ball_divergence(1) == pytest.approx(0.17648520831067255, rel=1e-14)
    assert uniform_ball_divergence(2) == pytest.approx(1.0 - math.log(2.0), rel=1e-14)
    ks = np.arange(1, 200)
    d = np.array([uniform_ball_divergence(int(k)) for k in ks])
    assert np.all(np.diff(d) > 0) and np.all(np.diff(d / ks) < 0)


def test_ball_marginal_normalized():
    for k in (1, 2, 5):
        mass = integrate.quad(lambda x: ball_marginal_pdf(x, 3.0, 2.0, k), 1.0, 5.0)[0]
        assert mass == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("a, b, value", H_CASES)
def test_h_integral_mpmath(a, b, value):
    assert h_integral(a, b) == pytest.approx(value, rel=1e-10, abs=1e-14)


def test_h_integral_closed_forms():
    a = 0.7
    b1 = ((1 + a) * math.log1p(a) - (1 - a) * math.log1p(-a) - 2 * a) / a
    assert h_integral(a, 1.0) == pytest.approx(b1, rel=1e-11)
    for b in (0.5, 1.0, 2.5):
        at_one = 2 ** (2 * b - 1) * beta(b, b) * (math.log(2.0) + digamma(b) - digamma(2 * b))
        assert h_integral(1.0, b) == pytest.approx(at_one, rel=1e-10)
    assert h_integral(0.0, 3.0) == 0.0


def test_h_integral_series_oracle():
    # H = -sum_m a^(2m) / (2m) B(m + 1/2, b)
    for a, b in ((0.3, 0.75), (0.6, 4.0), (0.95, 1.5)):
        m = np.arange(1, 4000)
        series = -np.sum(a ** (2 * m) / (2 * m) * beta(m + 0.5, b))
        assert h_integral(a, b) == pytest.approx(series, rel=1e-9)


def test_log_second_moment_quadrature():
    ck, r, k = 3.0, 1.5, 3
    direct = integrate.quad(lambda x: math.log(x * x) * ball_marginal_pdf(x, ck, r, k), ck - r, ck + r)[0]
    assert ball_log_second_moment(ck, r, k) == pytest.approx(direct, rel=1e-10)
    assert ball_log_second_moment(ck, r, k, "affine_bound") < ball_log_second_moment(ck, r, k)


def test_mult_channel_spec_validation():
    with pytest.raises(DomainError):
        BallChannelSpec(1.0, 2.0, 2)
    with pytest.raises(DimensionMismatch):
        BallChannelSpec(np.array([3.0, 3.0, 3.0]), 1.0, 2)


def test_mult_channel_structure():
    spec = BallChannelSpec(10.0, 2.0, 4)
    eps = mult_channel_epsilon(spec)
    assert eps.epsilon == pytest.approx(sum(eps.components.values()))
    lower, upper = mult_channel_bounds(spec)
    assert upper == pytest.approx(4 * 4 / 6)
    assert 0 < lower < upper
    assert mult_channel_bounds(spec, "affine_bound")[0] <= lower
