from __future__ import annotations

import logging
import traceback

_logger = logging.getLogger(__name__)

__all__ = [
    "logExceptionHelper",
    "PyLockerException",
    "InputDataError",
    "DataParseError",
    "EmptyDatasetError",
    "ParameterError",
    "DomainError",
    "DegenerateDomainError",
    "NumericError",
    "SingularSystemError",
    "TuningError",
    "BenchmarkError",
]

EXIT_OK = 0
EXIT_IO = 2
EXIT_USAGE = 3
EXIT_BENCHMARK = 4
EXIT_NUMERIC = 5


def logExceptionHelper(message: str, level: str = "debug", exception=Exception):
    """Log message at designated level, and raise exception when level is 'raise'."""
    if level in ["", "ignore"]:
        return

    if level not in ["debug", "warning", "error", "raise"]:
        raise ValueError(f"The parameter level must be either 'debug', 'warning', 'error' or 'raise', got: '{level}'")

    if level == "raise":
        _logger.error(message)
        raise exception(message)
    getattr(_logger, level)(message)


class PyLockerException(Exception):
    """Base exception, records the stack where it was raised."""

    exit_code: int = EXIT_NUMERIC
    log_level: str = "error"

    def __init__(self, message, *args, **kwargs):
        super().__init__(message, *args, **kwargs)
        self.message = message

        # Capture the stack trace when the exception is instantiated
        self.stack = traceback.format_stack()[:-1]

        self.logException()

    def __str__(self) -> str:
        return self.message or "Unknown Error!"

    def __repr__(self) -> str:
        return f"{type(self).__name__}('{self}')"

    def logException(self):
        """Log the exception message and its associated stack trace."""
        ignore_lines_with = {'<frozen importlib._bootstrap>', '<frozen importlib._bootstrap_external>'}
        filtered_stack = filter(lambda x: all(ignore not in x for ignore in ignore_lines_with), self.stack)

        log = getattr(_logger, self.log_level)
        _logger.debug(''.join(filtered_stack))
        log(repr(self))

    def toJson(self) -> dict:
        return {"error": type(self).__name__, "message": str(self), "exit_code": self.exit_code}


class InputDataError(PyLockerException):
    exit_code = EXIT_IO


class DataParseError(InputDataError):
    """A malformed CSV row, names the file and line."""

    def __init__(self, file_path: str, line: int, reason: str):
        self.file_path = file_path
        self.line = line
        super().__init__(f"{file_path}:{line}: {reason}")


class EmptyDatasetError(InputDataError):
    pass


class ParameterError(PyLockerException, ValueError):
    exit_code = EXIT_USAGE


class DomainError(PyLockerException, ValueError):
    exit_code = EXIT_USAGE


class DegenerateDomainError(DomainError):
    exit_code = EXIT_IO


class NumericError(PyLockerException, ArithmeticError):
    exit_code = EXIT_NUMERIC


class SingularSystemError(NumericError):
    # Grid searches catch these routinely
    log_level = "debug"


class TuningError(PyLockerException):
    exit_code = EXIT_NUMERIC

    def __init__(self, message: str, failures: list | None = None):
        self.failures = failures or []
        super().__init__(message)


class BenchmarkError(PyLockerException):
    exit_code = EXIT_BENCHMARK
