"""Exception hierarchy shared by the library and the CLI."""

from __future__ import annotations


class ApiMentionError(Exception):
    """Base class for every error raised by this package."""


class InputError(ApiMentionError):
    """Bad user-supplied input. The CLI maps these to exit code 1."""


class ParseError(InputError):
    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = ""
        if source:
            where += f"{source}"
        if line is not None:
            where += f":{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)


class ValidationError(InputError):
    pass


class UnknownIdError(InputError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else ""


class UnreachableResourceError(InputError):
    """No resource link exists for an API or module."""


class TrainingError(InputError):
    pass


class InvariantError(ApiMentionError):
    """An internal consistency check failed. The CLI maps these to exit code 2."""
