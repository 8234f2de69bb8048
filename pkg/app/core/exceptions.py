"""Exceptions carrying the process exit code the command line reports."""

from typing import Any, Dict, List, Optional


# Process exit codes surfaced by the command line
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


class AppException(Exception):
    """Base of every expected failure; ``details`` names the offending parameters and values."""

    def __init__(self, message: str, exit_code: int = EXIT_FAILURE, details: Optional[Dict[str, Any]] = None):
        self.message = message
        self.exit_code = exit_code
        self.details = details or {}
        super().__init__(self.message)

    def __str__(self) -> str:
        return self.message

    def to_dict(self) -> Dict[str, Any]:
        """Payload printed on stderr, see ``ErrorReport``."""
        return {
            "error_type": type(self).__name__,
            "message": self.message,
            "exit_code": self.exit_code,
            "details": self.details
        }


class ValidationError(AppException):
    """Raised when a parameter or precondition check fails.

    Used for invalid channel probabilities, inconsistent model parameters,
    malformed inputs and violated operation preconditions.
    """

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, exit_code=EXIT_USAGE, details=details)


class ConfigurationError(AppException):
    """Raised when configuration is invalid or missing."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, exit_code=EXIT_USAGE, details=details)


class ResourceLimitError(AppException):
    """Raised when a run would exceed a configured size cap.

    Used for the tree node-count guard and the Monte Carlo sample budget,
    both of which signal an infeasible desk-scale configuration.
    """

    def __init__(
        self,
        message: str,
        limit: Optional[float] = None,
        requested: Optional[float] = None,
        details: Optional[Dict[str, Any]] = None
    ):
        details = details or {}
        if limit is not None:
            details['limit'] = limit
        if requested is not None:
            details['requested'] = requested
        super().__init__(message, exit_code=EXIT_USAGE, details=details)


class FileProcessingError(AppException):
    """Raised when reading or writing run files fails."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, exit_code=EXIT_FAILURE, details=details)


class NumericalError(AppException):
    """Raised when a numerical routine cannot produce a trustworthy result.

    Used for non-monotone J tables (integration error), bisection without
    a sign change and similar failures.
    """

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, exit_code=EXIT_FAILURE, details=details)


class SuiteFailure(AppException):
    """Raised when the validation suite finishes with failing checks."""

    def __init__(self, message: str, failed_checks: Optional[List[str]] = None):
        super().__init__(
            message,
            exit_code=EXIT_FAILURE,
            details={"failed_checks": list(failed_checks or [])}
        )
