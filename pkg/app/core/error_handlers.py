"""Command-line exception handling with structured logging integration."""

import json
import sys
from contextlib import contextmanager
from typing import Iterator, Optional, TextIO

import click
from pydantic import ValidationError as PydanticValidationError

from app.core.exceptions import (
    EXIT_FAILURE,
    EXIT_USAGE,
    AppException,
    ConfigurationError,
    FileProcessingError,
    NumericalError,
    ResourceLimitError,
    SuiteFailure,
    ValidationError,
)
from app.core.logging import StructuredLogger
from app.models.responses import ErrorReport


def build_error_report(exc: BaseException) -> ErrorReport:
    """Map an exception to the error payload and exit code.

    Args:
        exc: The exception that ended the command

    Returns:
        ErrorReport with a consistent shape for every failure
    """
    if isinstance(exc, AppException):
        return ErrorReport(**exc.to_dict())
    if isinstance(exc, PydanticValidationError):
        return ErrorReport(
            error_type="ValidationError",
            message="Invalid parameters",
            exit_code=EXIT_USAGE,
            details={"errors": [
                f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" if err["loc"] else err["msg"]
                for err in exc.errors()
            ]}
        )
    if isinstance(exc, click.UsageError):
        return ErrorReport(
            error_type="UsageError",
            message=exc.format_message(),
            exit_code=EXIT_USAGE,
        )
    return ErrorReport(
        error_type="InternalError",
        message="An unexpected error occurred",
        exit_code=EXIT_FAILURE,
        details={"type": type(exc).__name__, "reason": str(exc)},
    )


def report_error(
    exc: BaseException,
    logger: Optional[StructuredLogger] = None,
    stream: Optional[TextIO] = None
) -> int:
    """Log ``exc``, print its JSON payload to stderr and return the exit code."""
    report = build_error_report(exc)
    if logger is not None:
        if isinstance(exc, (ValidationError, ConfigurationError, ResourceLimitError,
                            PydanticValidationError, click.UsageError)):
            logger.warning(
                f"Rejected: {report.message}",
                error_type=report.error_type,
                error_details=report.details
            )
        elif isinstance(exc, (FileProcessingError, NumericalError, SuiteFailure)):
            logger.error(
                f"Run failed: {report.message}",
                error_type=report.error_type,
                error_details=report.details
            )
        else:
            logger.error("Unexpected error", exc_info=exc, error_type=type(exc).__name__)
    out = stream if stream is not None else sys.stderr
    out.write(json.dumps(report.model_dump(), sort_keys=True, default=str) + "\n")
    return report.exit_code


@contextmanager
def cli_error_boundary(ctx: click.Context, logger: Optional[StructuredLogger] = None) -> Iterator[None]:
    """Turn any exception raised inside the block into a documented exit code."""
    try:
        yield
    except click.exceptions.Exit:
        raise
    except Exception as exc:
        code = report_error(exc, logger)
        if logger is not None:
            logger.clear_context()
        ctx.exit(code)
