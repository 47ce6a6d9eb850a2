"""Exception hierarchy shared by the solvers, norms and CLI."""


class StripHydroError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(StripHydroError):
    """Bad input: configuration, data layout or a violated precondition."""


class BoundaryError(ValidationError):
    """Dirichlet rows of a velocity profile are not zero."""


class CompatibilityError(ValidationError):
    """The vertical mean of u has a nonzero x-derivative."""


class ConfigError(ValidationError):
    pass


class NumericalError(StripHydroError):
    """A computation produced non-finite or out-of-range values."""


class InstabilityError(NumericalError):
    pass


class BandExhausted(NumericalError):
    """An analyticity band a - lambda*eta (or similar) reached zero."""


class InsufficientSpectrum(NumericalError):
    pass


class RadiusBandwidthConflict(NumericalError):
    """exp(r|k|) would overflow for the largest resolved wavenumber."""
