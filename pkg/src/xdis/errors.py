"""Exception types shared across the toolkit.

Everything raised on purpose derives from XdisError so callers (and the CLI)
can separate tool-level failures (exit 1) from genuine I/O trouble (exit 2).
"""


class XdisError(Exception):
    """Base class for all toolkit errors."""


class ParseError(XdisError):
    """A record in an input file could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(XdisError):
    """Input violated a documented precondition or invariant."""


class ConfigError(XdisError):
    """An analysis configuration is unusable."""


class IntegrityError(XdisError):
    """Protected text and its protection map disagree."""


class AlignmentError(XdisError):
    """A token stream could not be aligned against sentence spans."""

    def __init__(self, message: str, token_index: int):
        self.token_index = token_index
        super().__init__(f"token {token_index}: {message}")


class RangeError(XdisError):
    """A parameter (usually k) is outside the valid range for the input."""


class UndefinedMetricError(XdisError):
    """The metric is mathematically undefined for this input."""


class TooFewSentencesError(XdisError):
    """An article is too short for cluster-count selection."""
