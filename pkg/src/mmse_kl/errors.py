"""Exception hierarchy shared by all modules."""


class MmseKlError(ValueError):
    """Base class for every error raised by this package."""

    code = "error"


class DimensionMismatch(MmseKlError):
    code = "dimension_mismatch"


class NotPositiveDefinite(MmseKlError):
    code = "not_positive_definite"


class NotPositiveSemidefinite(MmseKlError):
    code = "not_positive_semidefinite"


class AsymmetricInput(MmseKlError):
    code = "asymmetric_input"


class GammaOutOfRange(MmseKlError):
    code = "gamma_out_of_range"


class DomainError(MmseKlError):
    code = "domain_error"


class AllZeroSpectrum(MmseKlError):
    """Every eigenvalue of the MMSE matrix vanishes, so X is a.s. a function of Y."""

    code = "all_zero_spectrum"


class EigenFailure(MmseKlError):
    code = "eigen_failure"


class QuadratureFailure(MmseKlError):
    code = "quadrature_failure"


class NotNormalized(MmseKlError):
    code = "not_normalized"


class GridTooCoarse(MmseKlError):
    code = "grid_too_coarse"
