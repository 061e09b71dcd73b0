"""Exception hierarchy shared by all rkappa modules."""
from __future__ import annotations

__all__ = [
    "RKappaError",
    "DomainError",
    "OrderError",
    "ConstraintError",
    "ConvergenceError",
    "IterationLimit",
    "InfeasibleStart",
    "SingularHessian",
    "MissingCovariance",
    "ParseError",
    "OrderViolation",
    "EmptyDataset",
    "NonConvergenceWarning",
]


class RKappaError(Exception):
    """Base class for every error raised by rkappa."""


class DomainError(RKappaError, ValueError):
    """An argument lies outside the support or domain of a function."""


class OrderError(DomainError):
    """Values that must be nonincreasing are not."""


class ConstraintError(RKappaError, ValueError):
    """Parameters violate a model constraint (e.g. C_r <= 0)."""


class ConvergenceError(RKappaError, RuntimeError):
    """A numerical procedure failed to converge or to bracket a root."""


class IterationLimit(ConvergenceError):
    """An iterative procedure exhausted its iteration budget."""


class InfeasibleStart(RKappaError, ValueError):
    """No feasible starting point for the optimizer could be found."""


class SingularHessian(RKappaError, ArithmeticError):
    """The observed information matrix is singular or not positive definite."""


class MissingCovariance(RKappaError, ValueError):
    """A covariance matrix is required but the fit does not carry one."""


class ParseError(RKappaError, ValueError):
    """A dataset file could not be parsed.

    ``row`` and ``column`` locate the offending cell when known.
    """

    def __init__(self, message: str, row=None, column=None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{message} (at {', '.join(where)})"
        super().__init__(message)


class OrderViolation(ParseError):
    """A dataset row is not nonincreasing."""


class EmptyDataset(ParseError):
    """A dataset file contains no blocks."""


class NonConvergenceWarning(RuntimeWarning):
    """The optimizer stopped on its iteration cap."""
