"""Exception hierarchy.

Each class carries an ``exit_code`` used by the command line front end so a
failure category can be told apart from the shell.
"""

from __future__ import annotations


class EprLabError(Exception):
    exit_code = 1


class InvalidInputError(EprLabError, ValueError):
    exit_code = 2


class ConfigurationError(EprLabError, ValueError):
    exit_code = 3


class InvalidModelError(EprLabError, ValueError):
    exit_code = 4


class InsufficientDataError(EprLabError):
    exit_code = 5


class UnsupportedAnalysisError(EprLabError):
    exit_code = 6


class ScenarioError(EprLabError):
    """Problem with a scenario file; ``path`` locates the offending field."""

    exit_code = 7

    def __init__(self, message: str, path: str | None = None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
