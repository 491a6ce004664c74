"""Exception hierarchy shared by every module in the package.

Each error names the operation that raised it so command-line diagnostics
can point at the failing stage without a traceback.
"""

from __future__ import annotations


class AdelicError(Exception):
    """Base class for all package errors."""


class ParseError(AdelicError):
    """Malformed textual input (expressions, descriptors, configs)."""


class PreconditionError(AdelicError):
    """A documented precondition of an operation was violated."""


class PrecisionError(PreconditionError):
    """A truncation window became too short to decide the result."""


class InvariantError(AdelicError):
    """An internal cross-check failed; indicates a bug, not bad input."""
