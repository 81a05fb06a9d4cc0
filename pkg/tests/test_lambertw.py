import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mmse_kl.errors import DomainError
from mmse_kl.lambertw import lambert_w, omega

# 40-digit mpmath values
OMEGA_CASES = [
    (1e-8, 0.99980001333311111, 1.0002000133335555),
    (1e-3, 0.93808069335664155, 1.0645858547990341),
    (0.1, 0.49323942377515345, 1.7722498296092303),
    (0.5, 0.15859433956303936, 3.1461932206205826),
    (1.0, 0.052469097457714872, 4.5052414957928834),
    (5.0, 1.6701979744043483e-5, 13.610868638149876),
    (100.0, 5.0910708089501099e-88, 206.32947428084081),
    (1000.0, 9.4785457710312204e-870, 2008.6051958277466),
]

W_CASES = [
    (0, -0.36, -0.80608431597081778),
    (0, -0.1, -0.11183255915896296),
    (0, 1.0, 0.56714329040978387),
    (0, 100.0, 3.3856301402900502),
    (0, 1e10, 20.028685413304951),
    (-1, -0.36, -1.222770133978506),
    (-1, -0.1, -3.5771520639572972),
    (-1, -1e-10, -26.295238819246926),
]


@pytest.mark.parametrize("t, w0, wm1", OMEGA_CASES)
def test_omega_matches_mpmath(t, w0, wm1):
    if w0 < 1e-300:
        # below the double range
        assert omega(0, t) == 0.0
    else:
        assert omega(0, t) == pytest.approx(w0, rel=2e-14)
    assert omega(-1, t) == pytest.approx(wm1, rel=2e-14)


@pytest.mark.parametrize("branch, x, w", W_CASES)
def test_lambert_w_matches_mpmath(branch, x, w):
    assert lambert_w(branch, x) == pytest.approx(w, rel=2e-15)


def test_branch_point_and_origin():
    assert lambert_w(0, -math.exp(-1.0)) == pytest.approx(-1.0, abs=1e-7)
    assert lambert_w(-1, -math.exp(-1.0)) == pytest.approx(-1.0, abs=1e-7)
    assert lambert_w(0, 0.0) == 0.0
    assert omega(0, 0.0) == omega(-1, 0.0) == 1.0


@pytest.mark.parametrize("branch, x", [(0, -0.5), (-1, 0.1), (-1, 0.0), (2, 1.0), (0, math.inf)])
def test_lambert_w_domain(branch, x):
    with pytest.raises(DomainError):
        lambert_w(branch, x)


@pytest.mark.parametrize("t", [-1e-3, math.inf, math.nan])
def test_omega_domain(t):
    with pytest.raises(DomainError):
        omega(0, t)


@settings(max_examples=300, deadline=None)
@given(st.floats(min_value=1e-6, max_value=50.0))
def test_omega_defining_equation(t):
    # w - log(w) = 2t + 1; below t ~ 1e-6 storing w itself limits this check
    for branch in (0, -1):
        w = omega(branch, t)
        lhs = (w - 1.0) - math.log(w)
        assert lhs == pytest.approx(2.0 * t, rel=1e-12, abs=1e-300)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=0.0, max_value=20.0), st.floats(min_value=1e-6, max_value=5.0))
def test_omega_monotone(t, dt):
    assert omega(0, t + dt) <= omega(0, t)
    assert omega(-1, t + dt) >= omega(-1, t)


def test_omega_near_branch_point_continuous():
    ts = np.geomspace(1e-12, 1.0, 400)
    w0 = np.array([omega(0, t) for t in ts])
    wm = np.array([omega(-1, t) for t in ts])
    assert np.all(np.diff(w0) < 0) and np.all(np.diff(wm) > 0)
