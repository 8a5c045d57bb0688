"""Exception hierarchy shared by all opstat modules.

Each exception carries the process exit code the CLI maps it to:
2 for input/validation problems, 3 for numerical capacity or precision
failures.
"""


class OpstatError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ParameterError(OpstatError):
    """An argument is outside its documented domain."""

    exit_code = 2


class DataError(OpstatError):
    """Input data cannot be parsed or is unusable."""

    exit_code = 2


class TieError(DataError):
    """Tied values inside an embedding window under the reject policy."""

    exit_code = 2

    def __init__(self, message: str, window_index: int):
        super().__init__(message)
        self.window_index = window_index


class DomainError(OpstatError):
    """A formula was evaluated where it has no finite value (e.g. a zero bin)."""

    exit_code = 2


class CapacityError(OpstatError):
    """The requested computation exceeds a configured size guard."""

    exit_code = 3


class PrecisionError(OpstatError):
    """A big-float evaluation failed its internal accuracy check."""

    exit_code = 3
