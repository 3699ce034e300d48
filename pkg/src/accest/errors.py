"""Exception hierarchy shared by every module."""


class AccEstError(Exception):
    """Base class for all library errors."""


class InvalidInput(AccEstError, ValueError):
    """Input data violates a structural precondition."""


class InvalidParameter(AccEstError, ValueError):
    """A configuration parameter is out of range."""


class NumericalFailure(AccEstError, ArithmeticError):
    """An iterative or linear-algebra routine did not produce a usable result."""


class DegenerateInput(AccEstError, ValueError):
    """Statistic is undefined for the data (e.g. zero variance)."""
