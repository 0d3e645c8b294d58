"""Exception hierarchy shared across the interpreter."""

from __future__ import annotations


class SfsemError(Exception):
    """Base class for every error raised by this package."""


class LoadError(SfsemError):
    """A chart or scenario file could not be parsed, did not match the
    schema, or failed validation.  ``diagnostics`` carries one message
    per problem."""

    def __init__(self, message: str, diagnostics: list[str] | None = None):
        super().__init__(message)
        self.diagnostics = list(diagnostics or [])


class PathLookupError(SfsemError):
    """A path did not resolve to a state, composition or junction."""


class EvalError(SfsemError):
    """Expression or condition evaluation failed (unbound variable,
    division by zero, type mismatch, zero modulus)."""


class SemanticError(SfsemError):
    """Execution reached a configuration no rule covers (no default path
    to a state, a graphical function flow that ends on a state, ...)."""


class BudgetError(SfsemError):
    """The per-round fuel budget ran out; execution likely diverges.

    ``trace`` holds the partial trace accumulated before the abort, when
    the failure happened inside a chart run.
    """

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace
