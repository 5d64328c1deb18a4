"""
Exceptions raised by pyiol.

Every error carries the process exit code the CLI maps it to.
"""


class IOLError(Exception):
    """Base class for all pyiol errors."""
    exit_code = 1


class ConfigError(IOLError, ValueError):
    """Invalid configuration or preset."""
    exit_code = 2


class DomainError(ConfigError):
    """Parameter outside its mathematical domain."""


class ParseError(ConfigError):
    """Malformed input file."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class EmptyInputError(ConfigError):
    """Input holds no data rows."""


class SizingError(ConfigError):
    """Dataset too small for the requested split."""


class UsageError(ConfigError):
    """Functions called with an incompatible combination of arguments."""


class NumericalError(IOLError):
    """Failure inside the numerical core."""
    exit_code = 3


class ShapeError(NumericalError, ValueError):
    """Matrix dimensions don't line up."""


class ConditioningError(NumericalError):
    """A system that should be SPD could not be factorized."""


class ArityError(NumericalError, ValueError):
    """Wrong number of operands."""
