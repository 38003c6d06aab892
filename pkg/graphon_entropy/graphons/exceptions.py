"""
Exception hierarchy shared by every app of the toolkit.

Management commands translate these into ``CommandError`` with an exit code;
library callers can catch ``GraphonEntropyError`` to handle all of them.
"""


class GraphonEntropyError(Exception):
    """Base class for toolkit errors."""


class DomainError(GraphonEntropyError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class DegenerateInputError(GraphonEntropyError):
    """Input is valid but carries no information (empty graph, zero spread)."""


class NumericalError(GraphonEntropyError, ArithmeticError):
    """An iterative method failed to converge."""

    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual

    def __str__(self):
        base = super().__str__()
        if self.iterations is None:
            return base
        return f"{base} (iterations={self.iterations}, residual={self.residual:.3e})"
