"""Exception types shared across the package."""

from __future__ import annotations


class InfharmError(Exception):
    """Base class for all package errors."""


class ArgumentError(InfharmError, ValueError):
    """Invalid argument (bad index, empty sample list, zero direction, ...)."""


class SingularPointError(InfharmError, ArithmeticError):
    """An expression was evaluated outside the domain where it is C^2.

    ``batch_index`` locates the offending entry when a batch of points was
    evaluated at once; ``point`` is filled in by the layer that knows the
    chart coordinates.
    """

    def __init__(self, message, point=None, batch_index=None):
        super().__init__(message)
        self.message = message
        self.point = point
        self.batch_index = batch_index

    def with_point(self, point):
        return SingularPointError(self.message, point=point, batch_index=self.batch_index)

    def __str__(self):
        if self.point is None:
            return self.message
        coords = ", ".join(f"{c:.6g}" for c in self.point)
        return f"{self.message} at ({coords})"


class DegenerateMetricError(InfharmError, ArithmeticError):
    """Metric matrix is not positive definite at the evaluation point."""


class OutOfDomainError(InfharmError, ValueError):
    """Point lies outside the chart domain of an operation."""


class ValidationError(InfharmError, ValueError):
    """A construction precondition failed numerical validation."""


class InfeasibleConstantError(InfharmError, ValueError):
    """Conserved constant too small for a real profile derivative."""


class WrongRegimeError(InfharmError, ValueError):
    """Parameters belong to a different branch of the reduction."""


class DegenerateProbeError(InfharmError, ValueError):
    """Blow-up probe requested for a map whose probe sequence is identically zero."""


class UnknownEntryError(InfharmError, KeyError):
    """Catalog id not registered."""

    def __str__(self):
        return str(self.args[0]) if self.args else "unknown catalog entry"


class ParseError(InfharmError, ValueError):
    """Malformed expression or map description."""

    def __init__(self, message, line=None, column=None, source=None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column
        self.source = source

    def __str__(self):
        where = []
        if self.source:
            where.append(self.source)
        if self.line is not None:
            where.append(f"line {self.line}")
        if self.column is not None:
            where.append(f"column {self.column}")
        prefix = ", ".join(where)
        return f"{prefix}: {self.message}" if prefix else self.message


class InvalidFactorError(InfharmError, ValueError):
    """Conformal factor is not strictly positive at an evaluation point."""
