"""Exception hierarchy. Each class carries the CLI exit code it maps to."""

from __future__ import annotations


class CensoredExtremesError(Exception):
    exit_code = 3


class ConfigError(CensoredExtremesError, ValueError):
    """Invalid experiment spec, grid, or command-line configuration."""

    exit_code = 1


class KRangeError(CensoredExtremesError, IndexError):
    """Requested number of top order statistics is out of range."""

    exit_code = 1


class DataError(CensoredExtremesError, ValueError):
    exit_code = 2


class ParseError(DataError):
    """Malformed survival file. ``row`` is the 1-based line number."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class DomainError(CensoredExtremesError, ValueError):
    """An argument lies outside the region where a formula is defined."""


class GuardError(DomainError):
    """A parameter guard of an asymptotic law is violated."""

    def __init__(self, message: str, guard: str = ""):
        self.guard = guard
        super().__init__(message)


class DegenerateEstimateError(CensoredExtremesError, ArithmeticError):
    """All top-k observations are censored, so the estimate is undefined."""


class SingularMomentError(DegenerateEstimateError):
    """Second log-moment equals the squared first one."""


class EvaluationError(CensoredExtremesError, ArithmeticError):
    """A test function returned a non-finite value where it carries weight."""


class NumericError(CensoredExtremesError, ArithmeticError):
    """Quadrature failed to reach its tolerance."""
