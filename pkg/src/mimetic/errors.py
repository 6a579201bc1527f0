"""Exception hierarchy shared by every layer of the kernel."""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from src.mimetic.models import SolveReport


class MimeticError(Exception):
    """Base class for all kernel errors."""


class InvalidArgumentError(MimeticError, ValueError):
    pass


class UnsupportedSpaceError(MimeticError):
    pass


class DomainError(MimeticError, ValueError):
    """A point or value lies outside the admissible domain."""


class InvalidMatrixError(MimeticError):
    pass


class ProblemTooLargeError(MimeticError):
    pass


class StateInvalidError(MimeticError):
    """The prognostic state cannot be advanced (e.g. nonpositive depth)."""


class SolverError(MimeticError):
    def __init__(self, message: str, report: SolveReport | None = None) -> None:
        super().__init__(message)
        self.report = report


class ConfigError(MimeticError):
    def __init__(
        self, message: str, *, key: str | None = None, line: int | None = None,
    ) -> None:
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(f"{prefix}{message}")
        self.key = key
        self.line = line
