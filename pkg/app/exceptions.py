"""
Custom exceptions for SpinBrayton.

This module defines specific exception types for better error handling
and debugging throughout the simulator. Numerical failures and invalid
physical inputs are kept apart so the CLI can map them to exit codes.
"""

from typing import Optional


class SpinBraytonException(Exception):
    """Base exception for all SpinBrayton-specific errors."""
    pass


class DomainError(SpinBraytonException, ValueError):
    """Raised when an input lies outside an operation's physical domain."""

    def __init__(
        self,
        message: str,
        quantity: Optional[str] = None,
        value: Optional[float] = None,
    ):
        self.quantity = quantity
        self.value = value
        super().__init__(message)


class ConfigurationError(SpinBraytonException):
    """Raised when a run configuration is inconsistent or incomplete."""
    pass


class NumericalError(SpinBraytonException):
    """Base class for failures of the numerical kernels."""

    def __init__(self, message: str, parameters: Optional[dict] = None):
        self.parameters = parameters or {}
        super().__init__(message)


class BracketError(NumericalError):
    """Raised when a root-finding bracket shows no sign change."""
    pass


class NoConvergence(NumericalError):
    """Raised when an iterative kernel hits its iteration cap."""

    def __init__(
        self,
        message: str,
        iterations: Optional[int] = None,
        parameters: Optional[dict] = None,
    ):
        self.iterations = iterations
        super().__init__(message, parameters)


class InfeasibleForce(NumericalError):
    """Raised when no positive beta attains a requested generalized force."""

    def __init__(
        self,
        message: str,
        target: Optional[float] = None,
        supremum: Optional[float] = None,
        parameters: Optional[dict] = None,
    ):
        self.target = target
        self.supremum = supremum
        super().__init__(message, parameters)


class NonClosure(NumericalError):
    """Raised when a solved Brayton cycle fails to close on itself."""

    def __init__(
        self,
        message: str,
        residual: Optional[float] = None,
        parameters: Optional[dict] = None,
    ):
        self.residual = residual
        super().__init__(message, parameters)
