#!/usr/bin/env python
"""
Contains the cafin exception classes.

Every exception derives from CafinError and from the builtin exception
matching its nature, so callers catching e.g. ``ValueError`` keep working.
"""

__all__ = ['CafinError', 'ParseError', 'ConsistencyError', 'ArgumentError', 'ConfigurationError',
           'CapacityError', 'UndefinedMetricError', 'DegenerateDataError', 'TrainingError',
           'ArtifactError']


class CafinError(Exception):
    """
        Base class of all the errors raised by cafin.
    """


class ParseError(CafinError, ValueError):
    """
        Raised when an input text file holds a malformed line.
    """
    def __init__(self, path, line_number, message) -> None:
        self.path = path
        self.line_number = line_number
        super().__init__(f"{path}:{line_number}: {message}")


class ConsistencyError(CafinError, ValueError):
    pass


class ArgumentError(CafinError, ValueError):
    pass


class ConfigurationError(CafinError, ValueError):
    pass


class CapacityError(CafinError, MemoryError):
    """
        Raised when a computation would not fit the configured budget.
    """
    def __init__(self, message, hint=None) -> None:
        self.hint = hint
        super().__init__(message if hint is None else f"{message} ({hint})")


class UndefinedMetricError(CafinError, ArithmeticError):
    pass


class DegenerateDataError(CafinError, ValueError):
    pass


class TrainingError(CafinError, RuntimeError):
    def __init__(self, epoch, message) -> None:
        self.epoch = epoch
        super().__init__(f"epoch {epoch}: {message}")


class ArtifactError(CafinError, OSError):
    pass
