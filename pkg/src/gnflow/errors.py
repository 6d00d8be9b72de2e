"""Exception types shared across the package."""


class GnflowError(Exception):
    """Base class for all errors raised by gnflow."""


class EvenNodeCountError(GnflowError, ValueError):
    """Grid has an even number of nodes; composite Simpson needs an odd count."""


class GridMismatchError(GnflowError, ValueError):
    """Two objects that must share a grid were built on different grids."""


class NonFiniteValueError(GnflowError, ValueError):
    """A NaN or infinity appeared where only finite values are allowed."""


class DomainError(GnflowError, ValueError):
    """A point is outside the admissible domain of an operator model."""


class NumericalError(GnflowError, RuntimeError):
    """A linear-algebra step failed; usually signals NaN contamination."""


class ScheduleError(GnflowError, ValueError):
    """Invalid regularization-schedule parameters or unparsable descriptor."""
