import json

import numpy as np
import pytest

from mmse_kl.errors import AsymmetricInput, DimensionMismatch, GammaOutOfRange, NotPositiveDefinite
from mmse_kl.gaussian import (
    GaussianReference,
    additive_reference,
    apply_estimator,
    correlated_signal_reference,
    exp_decay_covariance,
    gaussian_kl,
    gaussian_mmse,
    least_favorable_cov,
    lmmse_estimator,
    partition_reference,
    schur_complement,
    spectrum,
)
from mmse_kl.linalg import jacobi_eigh

from conftest import random_reference


def test_identity_reference_mmse():
    ref = partition_reference(np.zeros(4), np.eye(4), 2, 2)
    assert gaussian_mmse(ref) == 2.0
    np.testing.assert_array_equal(spectrum(schur_complement(ref)).eigenvalues, [1.0, 1.0])


def test_scalar_schur():
    ref = partition_reference([0, 0], [[2.0, 1.0], [1.0, 2.0]], 1, 1)
    assert schur_complement(ref).xi[0, 0] == pytest.approx(1.5, rel=1e-15)


def test_additive_schur_matches_closed_form():
    sx = exp_decay_covariance(10, 0.9)
    ref = additive_reference(sx, np.eye(10))
    xi = schur_complement(ref).xi
    np.testing.assert_allclose(xi, sx @ np.linalg.solve(sx + np.eye(10), np.eye(10)), atol=1e-13)


def test_correlated_reference_snr():
    ref = correlated_signal_reference(10, snr_db=0.0)
    np.testing.assert_allclose(ref.c - ref.a, np.eye(10), atol=1e-15)
    ref3 = correlated_signal_reference(1, snr_db=3.0)
    assert ref3.c[0, 0] - 1.0 == pytest.approx(10 ** -0.3)


def test_validation_errors():
    with pytest.raises(DimensionMismatch):
        partition_reference(np.zeros(3), np.eye(4), 2, 2)
    with pytest.raises(DimensionMismatch):
        partition_reference(np.zeros(4), np.eye(4), 2, 1)
    with pytest.raises(AsymmetricInput):
        partition_reference(np.zeros(2), [[1.0, 0.5], [0.4, 1.0]], 1, 1)
    with pytest.raises(NotPositiveDefinite):
        partition_reference(np.zeros(2), [[1.0, 0.0], [0.0, 0.0]], 1, 1)
    with pytest.raises(NotPositiveDefinite):
        # C0 fine but the joint matrix indefinite
        partition_reference(np.zeros(2), [[1.0, 2.0], [2.0, 1.0]], 1, 1)


def test_semidefinite_joint_accepted():
    # Y = X exactly: zero MMSE
    ref = partition_reference(np.zeros(2), [[1.0, 1.0], [1.0, 1.0]], 1, 1)
    assert gaussian_mmse(ref) == pytest.approx(0.0, abs=1e-15)


def test_json_round_trip(tmp_path):
    ref = correlated_signal_reference(3)
    path = tmp_path / "ref.json"
    path.write_text(json.dumps(ref.to_dict()))
    back = GaussianReference.load(path)
    np.testing.assert_array_equal(back.cov, ref.cov)
    with pytest.raises(DimensionMismatch):
        GaussianReference.from_dict({"mean": [0, 0], "cov": [[1, 0], [0, 1]], "k": 1})


def test_estimator_centering():
    ref = correlated_signal_reference(10)
    est = lmmse_estimator(ref)
    np.testing.assert_allclose(est(ref.mean_y), ref.mean_x, atol=1e-14)
    batch = np.tile(ref.mean_y, (3, 1))
    assert apply_estimator(est, batch).shape == (3, 10)
    with pytest.raises(DimensionMismatch):
        est(np.zeros(3))


def test_least_favorable_zero_gamma_echoes():
    ref = correlated_signal_reference(4)
    np.testing.assert_array_equal(least_favorable_cov(ref, 0.0), ref.cov)


def test_least_favorable_gamma_range():
    ref = partition_reference(np.zeros(2), [[2.0, 1.0], [1.0, 2.0]], 1, 1)
    with pytest.raises(GammaOutOfRange):
        least_favorable_cov(ref, -1.0 / 1.5)


def test_least_favorable_scalar_closed_form():
    # xi0 = 1.5; input variance becomes A - g xi^2/(1 + g xi)
    ref = partition_reference(np.zeros(2), [[2.0, 1.0], [1.0, 2.0]], 1, 1)
    g = 0.7
    cov = least_favorable_cov(ref, g)
    assert cov[0, 0] == pytest.approx(2.0 - g * 2.25 / (1 + g * 1.5), rel=1e-14)
    assert cov[0, 1] == 1.0 and cov[1, 1] == 2.0


def test_gaussian_kl_known_value():
    assert gaussian_kl([0], [[2.0]], [0], [[1.0]]) == pytest.approx(0.5 * (1 - np.log(2.0)), rel=1e-15)
    assert gaussian_kl([1.0, 0], np.eye(2), [0, 0], np.eye(2)) == pytest.approx(0.5)
    assert gaussian_kl([0, 0], np.eye(2), [0, 0], np.eye(2)) == 0.0


def test_jacobi_matches_lapack(rng):
    for n in (1, 2, 5, 12):
        g = rng.standard_normal((n, n))
        a = g + g.T
        np.testing.assert_allclose(jacobi_eigh(a), np.sort(np.linalg.eigvalsh(a))[::-1], atol=1e-12)


def test_spectrum_descending_nonnegative(rng):
    for _ in range(20):
        ref = random_reference(rng, 4, 3)
        w = spectrum(schur_complement(ref)).eigenvalues
        assert np.all(np.diff(w) <= 0) and np.all(w >= 0)
        assert w.sum() == pytest.approx(gaussian_mmse(ref), rel=1e-12)
