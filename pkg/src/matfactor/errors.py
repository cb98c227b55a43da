"""Exception hierarchy shared by all matfactor modules.

The CLI maps these onto process exit codes, so estimator code should raise
the most specific class that applies rather than bare ValueError.
"""

from __future__ import annotations


class MatrixFactorError(Exception):
    """Base class for all library errors."""


class ParseError(MatrixFactorError):
    """Malformed input text. Carries the 1-based line number when known."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class SchemaError(MatrixFactorError):
    """Input parsed but required columns/fields are absent."""


class StructuralError(MatrixFactorError):
    """Input internally inconsistent (column counts, duplicate dates)."""


class DomainError(MatrixFactorError):
    """Arguments outside the operation's domain (ranks, empty samples)."""


class DegeneracyError(MatrixFactorError):
    """Estimation cannot proceed: collapsed projection, zero variance."""


class NumericError(MatrixFactorError):
    """Non-finite intermediate values or failure to converge numerically."""


class CollinearityError(MatrixFactorError):
    """Regressor matrix numerically rank deficient."""


class ContractError(MatrixFactorError):
    """Caller violated a documented precondition (non-nested models, ...)."""


class DimensionalityError(MatrixFactorError):
    """Too many parameters for the available observations."""
