"""Exception hierarchy shared by all modules."""


class RadharError(Exception):
    """Base class for toolkit errors."""


class InvalidArgumentError(RadharError, ValueError):
    """An argument violates an operation's precondition."""


class NumericalFailureError(RadharError, ArithmeticError):
    """A numerical kernel could not produce a finite result (e.g. singular matrix)."""


class UndefinedStatisticError(RadharError, ValueError):
    """A statistic is undefined for the given data (e.g. zero variance)."""
