import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mmse_kl.bounds import (
    PhiEquation,
    bound_value,
    bounds_from_spectrum,
    flat_spectrum_bounds,
    gamma_brackets,
    mmse_bounds,
    phi,
    solve_gamma,
)
from mmse_kl.errors import AllZeroSpectrum, DomainError, GammaOutOfRange
from mmse_kl.gaussian import Spectrum, partition_reference

spectra = st.lists(st.floats(min_value=1e-3, max_value=1e3), min_size=1, max_size=12)
radii = st.floats(min_value=1e-6, max_value=20.0)


def test_phi_values():
    assert phi(0.0) == 0.0
    assert phi(1.0) == pytest.approx(math.log(2.0) - 0.5, rel=1e-15)
    # series branch agrees with the direct formula just above the cutoff
    t = 1.1e-3
    assert phi(t * 0.9) == pytest.approx(math.log1p(t * 0.9) - t * 0.9 / (1 + t * 0.9), rel=1e-9)
    assert phi(-1e-4) == pytest.approx(1e-8 / 2 + 2e-12 / 3, rel=1e-10)
    with pytest.raises(DomainError):
        phi(-1.0)


def test_scalar_roots_mpmath():
    # phi(g) = 1 for xi = 1, eps = 0.5
    assert solve_gamma([1.0], 0.5, "plus") == pytest.approx(5.3053952792716912, rel=1e-14)
    assert solve_gamma([1.0], 0.5, "minus") == pytest.approx(-0.68215556710062732, rel=1e-14)
    res = bounds_from_spectrum([1.0], 0.5)
    assert res.lower == pytest.approx(0.15859433956303936, rel=1e-13)


def test_two_eigenvalue_spectrum_mpmath():
    res = bounds_from_spectrum([2.0, 0.5], 1.0)
    assert res.gamma_plus == pytest.approx(4.8986418693556443, rel=1e-13)
    assert res.gamma_minus == pytest.approx(-0.38821830948921323, rel=1e-13)
    assert res.lower == pytest.approx(0.33018784003832999, rel=1e-13)
    assert res.upper == pytest.approx(9.5664403345571936, rel=1e-13)


def test_zero_radius_and_zero_spectrum():
    ref = partition_reference(np.zeros(4), np.eye(4), 2, 2)
    res = mmse_bounds(ref, 0.0)
    assert res.lower == res.upper == 2.0
    assert solve_gamma([1.0, 2.0], 0.0, "plus") == 0.0
    with pytest.raises(AllZeroSpectrum):
        solve_gamma([0.0, 0.0], 0.1, "plus")
    res = bounds_from_spectrum([0.0], 1.0)
    assert res.lower == res.upper == 0.0


def test_errors():
    with pytest.raises(DomainError, match="epsilon must be nonnegative"):
        solve_gamma([1.0], -0.1, "plus")
    with pytest.raises(DomainError):
        solve_gamma([1.0], 0.1, "sideways")
    with pytest.raises(GammaOutOfRange):
        bound_value([2.0], -0.5)
    with pytest.raises(DomainError):
        flat_spectrum_bounds(1.0, 0, 1.0)


def test_zero_eigenvalues_ignored():
    a = bounds_from_spectrum([1.5, 0.3], 0.8)
    b = bounds_from_spectrum([1.5, 0.3, 0.0, 0.0], 0.8)
    assert a == b


@settings(max_examples=150, deadline=None)
@given(spectra, radii)
def test_root_residual_and_ordering(values, eps):
    spec = Spectrum.from_values(values)
    eq = PhiEquation(spec, 2 * eps)
    res = bounds_from_spectrum(spec, eps)
    assert res.gamma_minus < 0 < res.gamma_plus
    assert res.gamma_minus * spec.largest > -1.0
    assert abs(eq.residual(res.gamma_plus)) <= 1e-10 * 2 * eps + 1e-13
    assert abs(eq.residual(res.gamma_minus)) <= 1e-10 * 2 * eps + 1e-13
    assert res.lower <= res.reference_mmse <= res.upper


@settings(max_examples=100, deadline=None)
@given(spectra, st.floats(min_value=1e-3, max_value=5.0), st.floats(min_value=1.01, max_value=3.0))
def test_bounds_monotone_in_radius(values, eps, factor):
    a = bounds_from_spectrum(values, eps)
    b = bounds_from_spectrum(values, eps * factor)
    assert b.lower <= a.lower * (1 + 1e-12)
    assert b.upper >= a.upper * (1 - 1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=1e-3, max_value=100.0), st.integers(1, 64), st.floats(min_value=1e-4, max_value=10.0))
def test_flat_closed_form(xi0, k, eps):
    lo, hi = flat_spectrum_bounds(xi0, k, eps)
    res = bounds_from_spectrum([xi0] * k, eps)
    assert res.lower == pytest.approx(lo, rel=1e-10)
    assert res.upper == pytest.approx(hi, rel=1e-10)


def test_brackets_contain_root_skewed(rng):
    for _ in range(50):
        values = np.exp(rng.uniform(-4, 3, rng.integers(2, 10)))
        eps = rng.uniform(0.01, 5.0)
        for branch in ("plus", "minus"):
            lo, hi = gamma_brackets(values, eps, branch)
            g = solve_gamma(values, eps, branch)
            assert lo <= g <= hi
