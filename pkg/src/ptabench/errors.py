"""Exception hierarchy shared by the frontend, the engines and the CLI."""

from __future__ import annotations


class PtaError(Exception):
    """Base class for every error raised by ptabench."""

    exit_code = 1


class ParseError(PtaError):
    def __init__(self, message: str, file: str = "<input>", line: int = 0, col: int = 0):
        self.file = file
        self.line = line
        self.col = col
        self.message = message
        super().__init__(f"{file}:{line}:{col}: {message}")


class SemanticError(ParseError):
    """Well-formed syntax that the frontend still rejects (types, const, scoping)."""


class BudgetExceeded(PtaError):
    """An iteration, context or path budget ran out before a fixed point."""

    exit_code = 2


class InvariantViolation(PtaError):
    """An engine produced results that break a guaranteed ordering or identity."""

    exit_code = 3
