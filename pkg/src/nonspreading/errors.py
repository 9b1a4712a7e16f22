"""Exception hierarchy shared across the package."""


class NonspreadingError(Exception):
    """Base class for all package errors."""


class InvalidGrid(NonspreadingError, ValueError):
    pass


class GridMismatch(NonspreadingError, ValueError):
    pass


class DomainOverflow(NonspreadingError, OverflowError):
    pass


class IndexTooLarge(NonspreadingError, ValueError):
    pass


class TimeOutOfRange(NonspreadingError, ValueError):
    pass


class ComplexPotential(NonspreadingError, ValueError):
    """A construction step needs a real potential but got V_i != 0."""


class NotConfining(NonspreadingError, ValueError):
    pass


class ConvergenceFailure(NonspreadingError, RuntimeError):
    pass


class UnsupportedPotential(NonspreadingError, ValueError):
    pass


class SupportEscape(NonspreadingError, RuntimeError):
    """Packet density reaches the edge of the region where it can be trusted."""


class SolverBreakdown(NonspreadingError, ArithmeticError):
    pass


class DirichletViolation(NonspreadingError, ValueError):
    pass


class InsufficientSupport(NonspreadingError, ValueError):
    pass


class InsufficientSnapshots(NonspreadingError, ValueError):
    pass


class ConfigError(NonspreadingError, ValueError):
    pass
