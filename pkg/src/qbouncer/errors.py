"""Exception types shared across the package."""


class QBouncerError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(QBouncerError, ValueError):
    """Invalid experiment configuration (bad field value, missing key, ...)."""


class PropagationError(QBouncerError, RuntimeError):
    """A solver aborted mid-run (norm drift, NaN, basis truncation, ...)."""
