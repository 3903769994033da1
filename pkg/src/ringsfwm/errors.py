"""Exception hierarchy shared by all ringsfwm modules."""

from __future__ import annotations


class RingSfwmError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(RingSfwmError, ValueError):
    """A physical parameter violates its constraints (e.g. non-positive speed)."""


class CoverageError(RingSfwmError):
    """A grid does not cover the support required by the requested operation."""


class GridMismatchError(RingSfwmError):
    """Two sampled quantities were combined on incompatible grids."""


class AccuracyError(RingSfwmError):
    """A numerical routine could not reach the requested tolerance.

    Carries the best available estimate so callers can decide whether to
    proceed anyway.
    """

    def __init__(self, message: str, best_estimate=None, error_estimate=None):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.error_estimate = error_estimate


class DivergenceError(RingSfwmError):
    """An ODE trajectory became non-finite.  Records the failure time."""

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time


class UndefinedAnalysisError(RingSfwmError):
    """The requested analysis is undefined for this input (e.g. zero kernel)."""


class ConfigError(RingSfwmError):
    """A scenario configuration file is malformed; message names the field."""


class AliasingWarning(UserWarning):
    """A sampled signal has not decayed at its grid edges."""
