"""Exception types.

Everything raised on bad data or bad configuration derives from
:class:`DynamapError`; the CLI maps those to exit code 2 and anything
else to exit code 3.
"""


class DynamapError(Exception):
    """Base class for data, schema, and configuration problems."""


class ParseError(DynamapError):
    """Malformed input (TSV row, log line); carries a line number where known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SchemaError(DynamapError):
    """A configured column or key is missing or unusable."""


class SerializationError(DynamapError):
    """A value cannot be written in the requested format."""


class DataError(DynamapError):
    """Inconsistent or incomplete records (duplicates, gaps, bad values)."""


class SelectionError(DynamapError):
    """A subset component's quota cannot be met."""


class TrainingError(DynamapError):
    """Training diverged (non-finite loss)."""


class RenderError(DynamapError):
    """Dynamics cannot be drawn (mixed epoch counts, bad palette)."""


class ConfigError(DynamapError):
    """Invalid experiment or trainer configuration."""
