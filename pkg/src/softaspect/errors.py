class SoftAspectError(Exception):
    """Base class for package errors."""


class ParseError(SoftAspectError, ValueError):
    """Malformed input file; the message names the line (and column when known)."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + where)


class ValidationError(SoftAspectError, ValueError):
    """Input parsed but violates a data invariant."""


class ConfigurationError(SoftAspectError, ValueError):
    """Parameters that cannot produce a valid model."""


class TrainingError(SoftAspectError, RuntimeError):
    pass
