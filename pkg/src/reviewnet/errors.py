from __future__ import annotations

from dataclasses import dataclass


class ReviewnetError(Exception):
    """Base class for all reviewnet errors."""


class InputError(ReviewnetError):
    """Fatal problem with user-supplied input (CLI exit code 1)."""


class ConflictingOverride(InputError):
    def __init__(self, lines: list[str]):
        self.lines = lines
        super().__init__("conflicting identity overrides:\n  " + "\n  ".join(lines))


class UnknownNode(ReviewnetError, KeyError):
    def __init__(self, person_id: int):
        self.person_id = person_id
        super().__init__(f"person {person_id} is not a node of this network")

    def __str__(self) -> str:
        return self.args[0]


class EmptyGrid(ReviewnetError):
    pass


class InvariantViolation(ReviewnetError):
    """An internal consistency check failed (CLI exit code 2)."""


@dataclass(frozen=True)
class Diagnostic:
    """A non-fatal problem found while processing input."""

    code: str
    message: str
    where: str = ""

    def __str__(self) -> str:
        loc = f" [{self.where}]" if self.where else ""
        return f"{self.code}{loc}: {self.message}"
