"""Exception hierarchy.

Every error raised on purpose derives from :class:`PFLError` and from
``ValueError`` so callers that only know about the builtin still catch it.
"""


class PFLError(ValueError):
    pass


class ConfigError(PFLError):
    """Invalid population spec, cell table, scenario config or CLI argument."""

    def __init__(self, message, field=None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class DomainError(PFLError):
    """An argument lies outside the domain of the operation."""


class EmptySampleError(PFLError):
    pass


class FitError(PFLError):
    pass


class PartitionMismatchError(PFLError):
    """A predictor is not constant on some cell of the table."""
