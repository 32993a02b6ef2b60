"""
Error types shared by the numerical core, the managers and the CLI.

The CLI maps these onto exit codes (see smx_cli.py), so every failure a user
can trigger should surface as one of the classes below.
"""
from typing import Any, Dict, List, Optional


class SmxError(Exception):
    """Base class for all errors raised by this project."""

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message
        self.context: Dict[str, Any] = {}

    def with_context(self, **context: Any) -> "SmxError":
        """Attach the grid point / parameters that were active when the error occurred."""
        self.context.update(context)
        return self

    def __str__(self) -> str:
        if not self.context:
            return self.message
        where = ", ".join(f"{k}={v}" for k, v in sorted(self.context.items()))
        return f"{self.message} (at {where})"


class ParameterError(SmxError, ValueError):
    """A parameter lies outside its documented domain."""

    def __init__(self, name: str, value: Any, requirement: str):
        super().__init__(f"invalid {name}={value!r}: {requirement}")
        self.name = name
        self.value = value


class DomainError(SmxError, ValueError):
    """Non-finite input handed to a numerical routine."""


class ShapeError(SmxError, ValueError):
    """Array shapes do not agree."""


class NumericalError(SmxError, ArithmeticError):
    """A computation produced a non-finite value at runtime."""


class MdpValidationError(SmxError):
    """An MDP (usually loaded from a file) breaks one or more invariants."""

    def __init__(self, source: str, violations: List[str]):
        listing = "\n  - ".join(violations)
        super().__init__(f"invalid MDP {source}: {len(violations)} violation(s)\n  - {listing}")
        self.source = source
        self.violations = violations


class ConfigError(SmxError):
    """Malformed or incomplete experiment configuration."""

    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line
