"""Exception types with stable error kinds and CLI exit codes.

Every error raised by this package carries a short machine-readable
``kind`` slug and maps onto one of three exit-code families:
validation (3), data (4), computation (5). Usage errors (exit 2) are
handled by the argument parser itself.
"""

from __future__ import annotations

EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_DATA = 4
EXIT_COMPUTATION = 5


class TimegrainError(Exception):
    """Base class; ``kind`` is a stable slug suitable for scripting."""

    exit_code = EXIT_COMPUTATION

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind
        self.message = message

    def __str__(self) -> str:
        return f"{self.kind}: {self.message}"


class ValidationError(TimegrainError):
    """Ill-formed calendars, descriptors, configs, or schemas."""

    exit_code = EXIT_VALIDATION


class DataError(TimegrainError):
    """Problems in user-supplied data files (row-addressed where possible)."""

    exit_code = EXIT_DATA


class ComputationError(TimegrainError):
    """Requests outside the supported algebra or statistics."""

    exit_code = EXIT_COMPUTATION
