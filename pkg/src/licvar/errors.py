"""Exception hierarchy shared across licvar."""

from __future__ import annotations

from typing import Any


class LicvarError(Exception):
    """Base class for all licvar errors."""


class ValueDomainError(LicvarError, ValueError):
    """A term value lies outside the domain of its kind."""


class ValidationError(LicvarError, ValueError):
    """A term vector failed validation."""

    def __init__(self, violations: list[Any]):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"invalid term vector: {lines}")


class SchemaError(LicvarError):
    """A data file (knowledge base, index, rule table) is malformed."""

    def __init__(self, path: Any, field: str, message: str):
        self.path = str(path)
        self.field = field
        super().__init__(f"{self.path}: {field}: {message}")


class IncompatibleFingerprintError(LicvarError, ValueError):
    """Two fingerprint sets were produced with different parameters."""


class BackendError(LicvarError):
    """An embedding or reasoning backend cannot serve a request."""


class TransportError(BackendError):
    """The remote model service could not be reached."""

    def __init__(self, message: str, *, attempts: int = 0, retry_after: float | None = None):
        self.attempts = attempts
        self.retry_after = retry_after
        super().__init__(message)


class ProtocolError(BackendError):
    """The model kept answering outside the structured-output contract."""

    def __init__(self, message: str, *, attempts: int = 0, last_reply: str = ""):
        self.attempts = attempts
        self.last_reply = last_reply
        super().__init__(message)


class ParseError(LicvarError):
    """License parsing failed; ``partial`` holds what was computed so far."""

    def __init__(self, message: str, partial: Any = None):
        self.partial = partial
        super().__init__(message)


class NotFoundError(LicvarError, LookupError):
    """A package, release or license is not known."""


class UnknownLicenseError(NotFoundError):
    """A compatibility check was asked about an unrecognized license."""
