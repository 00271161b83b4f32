"""Exception types shared across the package."""


class GroundcheckError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(GroundcheckError, ValueError):
    """An operation was called with arguments violating its contract."""


class EmptyInputError(GroundcheckError, ValueError):
    """Text input carries no scoreable content."""


class ManifestError(GroundcheckError, ValueError):
    """A corpus manifest failed validation; message names the offending line(s)."""


class IncompleteRecordError(GroundcheckError, ValueError):
    """A record is missing one or more per-variant scores."""


class EmptyRunError(GroundcheckError, ValueError):
    """Aggregation requested over a run with no scored records."""


class TransportError(GroundcheckError, RuntimeError):
    """A remote call failed after exhausting retries; safe to retry later."""


class ContentError(GroundcheckError, RuntimeError):
    """A remote endpoint answered, but with unusable content.

    Carries the raw payload for audit.
    """

    def __init__(self, message: str, payload: object = None):
        super().__init__(message)
        self.payload = payload


class ConfigurationError(GroundcheckError, RuntimeError):
    """Fatal misconfiguration (bad credentials, invalid run config)."""
