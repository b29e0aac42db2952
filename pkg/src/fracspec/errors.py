"""Exception types raised across the package."""

from __future__ import annotations


class FracspecError(Exception):
    """Base class for all package errors."""


class DomainError(FracspecError, ValueError):
    """An argument lies outside the domain of the operation."""


class AccuracyError(FracspecError, ArithmeticError):
    """A numerical procedure could not reach its accuracy target.

    ``estimates`` holds the last values that were compared, when available.
    """

    def __init__(self, message: str, estimates: tuple = ()) -> None:
        super().__init__(message)
        self.estimates = tuple(estimates)


class ConvergenceError(AccuracyError):
    """An iteration hit its cap before converging."""


class NotSPDError(FracspecError, ArithmeticError):
    """A matrix expected to be symmetric positive definite is not."""
