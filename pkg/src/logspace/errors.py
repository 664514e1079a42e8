class LogSpaceError(Exception):
    """Base class for data errors raised by this package."""


class SchemaError(LogSpaceError, ValueError):
    pass


class RecordRejected(LogSpaceError, ValueError):
    """A single record could not be standardized; the reason is the message."""
