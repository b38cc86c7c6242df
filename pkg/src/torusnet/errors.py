"""Exception types shared across the package."""


class TorusnetError(Exception):
    """Base class for all package-specific failures."""


class ConfigError(TorusnetError):
    """Invalid or inconsistent run configuration."""


class KernelConstructionError(TorusnetError):
    """Weight-sequence construction failed (bad spectrum or excess tail mass)."""


class SpectrumError(TorusnetError):
    """NEGATIVE_SPECTRUM: a covariance spectrum value is negative beyond tolerance."""

    def __init__(self, message: str, offset=None, time=None):
        super().__init__(message)
        self.offset = offset
        self.time = time


class NonFiniteStateError(TorusnetError):
    """NONFINITE_STATE: integration produced a non-finite value (step too large)."""

    def __init__(self, message: str, site=None, time=None):
        super().__init__(message)
        self.site = site
        self.time = time


class DegenerateInputError(TorusnetError):
    """DIVISION_DEGENERATE: ratio undefined because the denominator vanishes."""


class DuplicateNameError(TorusnetError):
    """DUPLICATE_NAME: an observable with this name is already registered."""
