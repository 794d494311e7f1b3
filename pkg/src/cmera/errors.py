"""Exception types raised by the cmera package."""


class CmeraError(Exception):
    """Base class for all package errors."""


class DomainError(CmeraError, ValueError):
    """An argument lies outside the domain of the operation."""


class IRDivergenceError(CmeraError, ArithmeticError):
    """A transform was requested for a kernel whose k -> 0 behaviour is not integrable."""


class ToleranceNotMet(CmeraError, ArithmeticError):
    """Quadrature could not certify the requested absolute tolerance."""


class DimensionMismatch(CmeraError, ValueError):
    """Bond dimensions of consecutive MPO matrices or boundary vectors disagree."""


class DegreeOverflow(CmeraError, ArithmeticError):
    """An automaton produced a path with more than two field insertions."""
