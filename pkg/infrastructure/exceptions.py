"""
Custom exception hierarchy for stable-spline-maxent.

This module defines custom exceptions for the domain, infrastructure and
application layers. Every exception carries an ``error_code`` and the CLI
exit code it maps to.
"""

from typing import Optional, Dict, Any


EXIT_OK = 0
EXIT_INPUT = 1
EXIT_DOMAIN = 2
EXIT_INFEASIBLE = 3


class DomainException(Exception):
    """
    Base exception for domain layer errors.

    This exception and its subclasses represent violations of the
    mathematical preconditions of the kernel, completion and
    identification operations.
    """

    exit_code = EXIT_DOMAIN

    def __init__(self, message: str, error_code: Optional[str] = None,
                 context: Optional[Dict[str, Any]] = None):
        """
        Initialize domain exception.

        Args:
            message: Error message
            error_code: Optional error code for categorization
            context: Optional context information
        """
        super().__init__(message)
        self.error_code = error_code
        self.context = context or {}


class ValidationException(DomainException):
    """Exception for a parameter outside its mathematical domain."""

    def __init__(self, field: str, message: str, value: Any = None):
        """
        Initialize validation exception.

        Args:
            field: Parameter that failed validation (e.g. ``alpha``)
            message: Validation error message
            value: The invalid value
        """
        super().__init__(f"Validation error on field '{field}': {message}")
        self.field = field
        self.value = value
        self.error_code = "VALIDATION_ERROR"


class DimensionMismatchException(ValidationException):
    """Exception for vectors or matrices whose sizes disagree."""

    def __init__(self, field: str, expected: Any, actual: Any):
        super().__init__(field, f"expected size {expected}, got {actual}", actual)
        self.expected = expected
        self.actual = actual
        self.error_code = "DIMENSION_MISMATCH"


class BusinessRuleException(DomainException):
    """Exception for violations of a structural rule of the problem."""

    def __init__(self, rule: str, message: str, context: Optional[Dict[str, Any]] = None):
        """
        Initialize business rule exception.

        Args:
            rule: The rule that was violated
            message: Error message
            context: Optional context information
        """
        super().__init__(f"Rule violation '{rule}': {message}")
        self.rule = rule
        self.error_code = "RULE_VIOLATION"
        self.context = context or {}


class InfeasibleExtensionException(BusinessRuleException):
    """
    Raised when a partial band matrix admits no positive definite extension.

    The 1-based index of the first band block that is not positive definite
    is the witness of infeasibility.
    """

    exit_code = EXIT_INFEASIBLE

    def __init__(self, block_index: int, bandwidth: int):
        super().__init__(
            "positive_definite_band_blocks",
            f"block {block_index} not positive definite",
            {"block_index": block_index, "bandwidth": bandwidth},
        )
        self.block_index = block_index
        self.bandwidth = bandwidth
        self.error_code = "INFEASIBLE_EXTENSION"


class NumericalException(DomainException):
    """Base exception for floating-point guard trips."""

    def __init__(self, message: str, error_code: str = "NUMERICAL_ERROR",
                 context: Optional[Dict[str, Any]] = None):
        super().__init__(message, error_code, context)


class OverflowGuardException(NumericalException):
    """Raised when a closed form would exceed the floating-point range."""

    def __init__(self, quantity: str, log_magnitude: float):
        super().__init__(
            f"{quantity} overflows double precision (log magnitude {log_magnitude:.1f})",
            "OVERFLOW_GUARD",
            {"quantity": quantity, "log_magnitude": log_magnitude},
        )


class CholeskyFailureException(NumericalException):
    """Raised when a matrix expected to be positive definite fails Cholesky."""

    def __init__(self, matrix_name: str, detail: str = ""):
        message = f"Cholesky factorization of {matrix_name} failed"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message, "CHOLESKY_FAILURE", {"matrix": matrix_name})


class OracleConvergenceException(NumericalException):
    """Raised when the brute-force entropy maximizer exhausts its sweep budget."""

    def __init__(self, sweeps: int, residual: float):
        super().__init__(
            f"coordinate ascent did not converge after {sweeps} sweeps "
            f"(gradient residual {residual:.3e})",
            "ORACLE_NON_CONVERGENCE",
            {"sweeps": sweeps, "residual": residual},
        )


class InfrastructureException(Exception):
    """
    Base exception for infrastructure layer errors.

    This exception and its subclasses represent file and format errors
    raised while reading or writing datasets, band matrices and results.
    """

    exit_code = EXIT_INPUT

    def __init__(self, message: str, error_code: Optional[str] = None,
                 original_exception: Optional[Exception] = None):
        """
        Initialize infrastructure exception.

        Args:
            message: Error message
            error_code: Optional error code
            original_exception: The original exception that caused this error
        """
        super().__init__(message)
        self.error_code = error_code
        self.original_exception = original_exception


class RepositoryException(InfrastructureException):
    """Base exception for repository layer errors."""

    def __init__(self, message: str, repository: Optional[str] = None,
                 original_exception: Optional[Exception] = None):
        """
        Initialize repository exception.

        Args:
            message: Error message
            repository: Name of the repository
            original_exception: The underlying parse or I/O error
        """
        super().__init__(message, original_exception=original_exception)
        self.repository = repository
        self.error_code = "REPOSITORY_ERROR"


class DatasetFormatException(RepositoryException):
    """Exception for CSV files that violate the ``t,u,y`` schema."""

    def __init__(self, message: str, column: Optional[str] = None,
                 original_exception: Optional[Exception] = None):
        super().__init__(message, repository="DatasetRepository",
                         original_exception=original_exception)
        self.column = column
        self.error_code = "DATASET_FORMAT_ERROR"


class BandMatrixFormatException(RepositoryException):
    """Exception for malformed band-matrix JSON documents."""

    def __init__(self, message: str, original_exception: Optional[Exception] = None):
        super().__init__(message, repository="BandMatrixRepository",
                         original_exception=original_exception)
        self.error_code = "BAND_MATRIX_FORMAT_ERROR"


class ApplicationException(Exception):
    """
    Base exception for application layer errors.

    This exception and its subclasses represent command-level failures
    such as unusable paths or unknown verification suites.
    """

    exit_code = EXIT_INPUT

    def __init__(self, message: str, error_code: Optional[str] = None,
                 inner_exception: Optional[Exception] = None):
        """
        Initialize application exception.

        Args:
            message: Error message
            error_code: Optional error code
            inner_exception: The underlying exception
        """
        super().__init__(message)
        self.error_code = error_code
        self.inner_exception = inner_exception
