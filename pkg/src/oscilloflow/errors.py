"""
Exception hierarchy for oscilloflow.

All errors derive from ValueError so callers that guard numerical code with
``except ValueError`` keep working.
"""


class OscilloflowError(ValueError):
    """Base class for every error raised by the package."""


class ConfigurationError(OscilloflowError):
    """Invalid configuration, size mismatch or generator/equation mismatch."""


class DomainError(OscilloflowError):
    """A mathematical precondition of an operation does not hold."""


class CheckpointError(OscilloflowError):
    """A checkpoint file is malformed (bad magic, truncated payload, ...)."""
