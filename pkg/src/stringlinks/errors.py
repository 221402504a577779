"""Exception types shared across the package."""


class StringLinkError(Exception):
    """Base class for all errors raised by :mod:`stringlinks`."""


class MalformedInputError(StringLinkError, ValueError):
    """Input text or data does not describe a valid object."""


class RankMismatchError(StringLinkError, ValueError):
    """Two operands live in free groups (or series rings) of different rank."""


class OutOfRangeError(StringLinkError, ValueError):
    """An index, degree or position lies outside the allowed range."""


class InsufficientClassError(StringLinkError, ValueError):
    """A longitude was computed to too small a nilpotency class for the request."""


class UnsupportedInputError(StringLinkError, ValueError):
    """The input is well formed but outside what the algorithm handles."""


class UnvalidatedCaseError(StringLinkError, ValueError):
    """Requested parameters lie beyond the validated case tables."""


class ResourceLimitError(StringLinkError, RuntimeError):
    """A computation exceeded its configured budget."""
