"""Custom exceptions and error handling for coarse-bezout."""

from typing import Optional, Dict, Any
from enum import Enum

from pydantic import ValidationError


class ErrorCategory(str, Enum):
    """Categories of errors for better debugging."""
    CONFIGURATION = "configuration"
    VALIDATION = "validation"
    NUMERIC_OVERFLOW = "numeric_overflow"
    EXPRESSION = "expression"
    MAP = "map"
    RESOLUTION = "resolution"
    CONTOUR = "contour"
    BOUND_DOMAIN = "bound_domain"
    UNKNOWN = "unknown"


class CoarseBezoutError(Exception):
    """Base exception for coarse-bezout."""

    def __init__(
        self,
        message: str,
        category: ErrorCategory = ErrorCategory.UNKNOWN,
        user_message: Optional[str] = None,
        suggestions: Optional[list] = None,
        context: Optional[Dict[str, Any]] = None
    ):
        super().__init__(message)
        self.message = message
        self.category = category
        self.user_message = user_message or message
        self.suggestions = suggestions or []
        self.context = context or {}

    def get_user_friendly_message(self) -> str:
        """Get a user-friendly error message with suggestions."""
        msg = f"❌ {self.user_message}"

        if self.suggestions:
            msg += "\n\n💡 Suggestions:"
            for suggestion in self.suggestions:
                msg += f"\n  • {suggestion}"

        return msg


class ConfigurationError(CoarseBezoutError):
    """Errors related to configuration files and settings."""

    def __init__(self, message: str, **kwargs):
        super().__init__(message, category=ErrorCategory.CONFIGURATION, **kwargs)


class InputValidationError(CoarseBezoutError):
    """Invalid parameters (r, delta, a, resolution, ...)."""

    def __init__(self, message: str, **kwargs):
        super().__init__(message, category=ErrorCategory.VALIDATION, **kwargs)


class ExponentOverflowError(CoarseBezoutError):
    """A base-2 exponent left the representable range."""

    def __init__(self, message: str, **kwargs):
        super().__init__(message, category=ErrorCategory.NUMERIC_OVERFLOW, **kwargs)


class ExpressionSyntaxError(CoarseBezoutError):
    """Malformed map expression. Carries the byte offset of the problem."""

    def __init__(self, message: str, offset: int = 0, **kwargs):
        kwargs.setdefault("context", {})["offset"] = offset
        super().__init__(message, category=ErrorCategory.EXPRESSION, **kwargs)
        self.offset = offset


class NonEntireOperationError(ExpressionSyntaxError):
    """Division, logarithms and friends are not entire."""


class UnknownIdentifierError(ExpressionSyntaxError):
    """Identifier that is neither a variable nor a known primitive."""


class UnknownMapError(CoarseBezoutError):
    """Requested builtin map does not exist."""

    def __init__(self, message: str, **kwargs):
        super().__init__(message, category=ErrorCategory.MAP, **kwargs)


class ResolutionCapError(CoarseBezoutError):
    """Grid would exceed the cell cap."""

    def __init__(self, message: str, **kwargs):
        super().__init__(message, category=ErrorCategory.RESOLUTION, **kwargs)


class ContourUnsafeError(CoarseBezoutError):
    """Contour passes too close to a zero for argument tracking."""

    def __init__(self, message: str, **kwargs):
        super().__init__(message, category=ErrorCategory.CONTOUR, **kwargs)


class BoundDomainError(CoarseBezoutError):
    """Parameters outside the range where a bound is stated."""

    def __init__(self, message: str, **kwargs):
        super().__init__(message, category=ErrorCategory.BOUND_DOMAIN, **kwargs)


def categorize_validation_error(error: Exception) -> CoarseBezoutError:
    """Convert pydantic validation errors into our custom error types."""
    if isinstance(error, CoarseBezoutError):
        return error

    if isinstance(error, ValidationError):
        details = error.errors()
        first = details[0] if details else {}
        field = ".".join(str(part) for part in first.get("loc", ())) or "input"
        reason = str(first.get("msg", error))
        # Custom validators raise ValueError("delta must be positive"); pydantic
        # prefixes those with "Value error, ".
        if reason.startswith("Value error, "):
            reason = reason[len("Value error, "):]
        else:
            reason = f"{field}: {reason}"
        return InputValidationError(
            f"Invalid input: {reason}",
            user_message=reason,
            suggestions=[
                "Check the flag values passed on the command line",
                "Run with --help to see accepted ranges",
            ],
            context={"field": field, "errors": len(details)},
        )

    if isinstance(error, ValueError):
        return InputValidationError(str(error), context={"original_error": str(error)})

    return CoarseBezoutError(
        f"Unexpected error: {error}",
        category=ErrorCategory.UNKNOWN,
        user_message="Unexpected internal error",
        suggestions=["Re-run with COARSE_BEZOUT_LOG_LEVEL=DEBUG and check the log file"],
        context={"original_error": str(error), "type": type(error).__name__},
    )
