"""Exception hierarchy shared by every solver and the CLI."""


class TrustselError(Exception):
    """Base class for all errors raised by this package."""


class InputError(TrustselError, ValueError):
    """Malformed or invalid input data."""


class ParseError(InputError):
    """A file could not be parsed; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class ConfigError(TrustselError, ValueError):
    """Invalid or infeasible solver configuration."""


class SizeError(TrustselError):
    """Instance too large for the requested exact method."""
