"""Exception hierarchy shared by the library and the command line."""

from __future__ import annotations


class FracDelayError(Exception):
    """Base class for every error raised by :mod:`fracdelay`."""


class DimensionError(FracDelayError, ValueError):
    """Matrix or vector shapes are incompatible."""


class DomainError(FracDelayError, ValueError):
    """An argument lies outside the domain of a function."""


class SingularityError(DomainError):
    """Evaluation requested exactly at a power singularity."""


class ConvergenceError(FracDelayError, ArithmeticError):
    """A truncated series failed to converge within its term budget.

    The partial sum and the magnitude of the last term are kept so callers
    can decide whether the result is still usable.
    """

    def __init__(self, message, partial=None, last_term=None):
        super().__init__(message)
        self.partial = partial
        self.last_term = last_term


class KernelDepthError(FracDelayError, IndexError):
    """A kernel table was queried beyond the depth it was built for."""


class QuadratureError(FracDelayError, ArithmeticError):
    """Panel refinement stalled before reaching the requested tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class ApplicabilityError(FracDelayError, ValueError):
    """A verification check does not apply to the problem's (mu, nu)."""
