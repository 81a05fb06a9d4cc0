"""MMSE bounds for joint distributions within a KL divergence ball around a Gaussian reference."""

from .bounds import (
    BoundsResult,
    PhiEquation,
    bound_value,
    bounds_from_spectrum,
    flat_spectrum_bounds,
    gamma_brackets,
    mmse_bounds,
    phi,
    solve_gamma,
)
from .divergences import (
    BallChannelSpec,
    GGChannelSpec,
    NonGaussianity,
    gg_crb,
    gg_divergence,
    gg_lower_bound,
    mult_channel_bounds,
    mult_channel_epsilon,
    uniform_ball_divergence,
)
from .errors import MmseKlError
from .gaussian import (
    GaussianReference,
    LinearEstimator,
    MmseMatrix,
    Spectrum,
    gaussian_kl,
    gaussian_mmse,
    least_favorable_cov,
    lmmse_estimator,
    partition_reference,
    schur_complement,
    spectrum,
)
from .lambertw import lambert_w, omega

__version__ = "0.1.0"
