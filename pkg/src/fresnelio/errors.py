"""Exception types shared by every module."""


class FresnelioError(Exception):
    """Base class for library errors."""


class DimensionError(FresnelioError, ValueError):
    pass


class NotClosedForm(FresnelioError):
    """The requested closed-form path does not cover this object."""


class Divergent(FresnelioError):
    """An integral or norm is infinite.

    ``tail`` carries the partial estimate that revealed the divergence,
    when one is available.
    """

    def __init__(self, message, tail=None):
        super().__init__(message)
        self.tail = tail


class NonConvergent(FresnelioError):
    """A limiting procedure failed to settle. ``trace`` holds the iterates."""

    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = list(trace)


class ResolutionError(FresnelioError):
    """A sampling grid is too coarse or too short for the integrand."""


class CauchyCheckFailed(FresnelioError):
    def __init__(self, message, pair, distance, certificate=None):
        super().__init__(message)
        self.pair = pair
        self.distance = distance
        self.certificate = certificate


class ConfigError(FresnelioError, ValueError):
    """Invalid experiment configuration (CLI exit code 2)."""
