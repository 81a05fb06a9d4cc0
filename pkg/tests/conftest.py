import numpy as np
import pytest

from mmse_kl.gaussian import partition_reference


def random_reference(rng, k, m, scale=1.0):
    """Random positive definite joint covariance with blocks k and m."""
    n = k + m
    g = rng.standard_normal((n, n + 2))
    cov = scale * (g @ g.T / (n + 2) + 0.05 * np.eye(n))
    mean = rng.standard_normal(n)
    return partition_reference(mean, cov, k, m)


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[number])
