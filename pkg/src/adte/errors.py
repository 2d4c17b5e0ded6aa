"""Exception types shared across the package."""


class AdteError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(AdteError, ValueError):
    """An argument violates an operation's domain (shape, range, NaN, ...)."""


class UndefinedTermError(AdteError, ValueError):
    """The requested quantity is mathematically undefined for the input."""


class InvalidProfileError(AdteError, ValueError):
    """A per-class q profile lies outside the open interval (0, 1)."""


class InvalidConfigError(AdteError, ValueError):
    """A configuration value is out of range or unknown."""


class StreamFormatError(AdteError, ValueError):
    """A stream file is malformed; carries the offending position."""

    def __init__(self, message: str, *, line: int | None = None,
                 offset: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        if offset is not None:
            message = f"byte offset {offset}: {message}"
        super().__init__(message)
        self.line = line
        self.offset = offset


class UnsupportedFormatError(StreamFormatError):
    """The file is not one of the supported stream formats/versions."""
