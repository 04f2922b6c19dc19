"""Exception hierarchy for fracibnr.

Numerical failures are never silenced: series that do not converge and
quadratures that do not reach their tolerance raise instead of returning
a truncated value.
"""


class FracIbnrError(Exception):
    """Base class for all package errors."""


class ConfigError(FracIbnrError):
    """Invalid model/run configuration (CLI exit code 2)."""


class DomainError(FracIbnrError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class DivergenceError(DomainError):
    """The requested quantity is a divergent integral or series."""


class RangeError(FracIbnrError, OverflowError):
    """Result not representable in double precision."""


class NumericalError(FracIbnrError):
    """A numerical method failed to reach its accuracy target (exit code 3)."""


class TruncationError(NumericalError):
    """A series evaluator hit its term cap before converging.

    Carries the achieved tail estimate so callers can report how far off
    the result was instead of silently truncating.
    """

    def __init__(self, message: str, tail_estimate: float | None = None):
        super().__init__(message)
        self.tail_estimate = tail_estimate


class QuadratureError(NumericalError):
    """Adaptive quadrature failed to converge to tolerance."""
