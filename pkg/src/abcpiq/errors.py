"""Exception hierarchy shared by all modules."""


class AbcPiqError(Exception):
    """Base class for every error raised by the package."""


class DomainError(AbcPiqError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class ConvergenceError(AbcPiqError, ArithmeticError):
    """A series failed to reach its tolerance within the term budget."""


class MismatchedOrderError(AbcPiqError, ValueError):
    """Two theta-polynomials with different fractional orders were combined."""


class DegenerateModelError(AbcPiqError, ArithmeticError):
    """The reproduction number is undefined or zero for the given rates."""


class SolverError(AbcPiqError, ArithmeticError):
    """Failure inside the numerical Volterra solver."""


class NonConvergenceError(SolverError):
    """Fixed-point iteration for an implicit step did not settle."""


class DegenerateGridError(SolverError, ValueError):
    """Time grid with no steps or a non-positive horizon."""


class ConfigError(AbcPiqError, ValueError):
    """Base class for scenario configuration problems."""


class ParseError(ConfigError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnknownKeyError(ConfigError):
    pass


class RangeError(ConfigError):
    pass
