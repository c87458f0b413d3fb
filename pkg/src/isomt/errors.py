"""Exception types raised across the toolkit.

Every error is a ``ValueError`` subclass so callers that only care about
"bad input" can catch one thing.
"""

from __future__ import annotations


class IsomtError(ValueError):
    """Base class for all toolkit errors."""


# textmodel
class EmptyLine(IsomtError):
    pass


class EmptyPhrase(IsomtError):
    pass


class ContainsMarker(IsomtError):
    pass


class InvalidTiming(IsomtError):
    pass


class DuplicateId(IsomtError):
    pass


# shared by metrics / align / synth
class LengthMismatch(IsomtError):
    pass


class EmptyCorpus(IsomtError):
    pass


class EmptyInput(IsomtError):
    pass


class OutOfRange(IsomtError):
    pass


class ZeroTotal(IsomtError):
    pass


# align
class TooFewTokens(IsomtError):
    pass


class TooLarge(IsomtError):
    pass


# timing
class CountMismatch(IsomtError):
    pass


class ZeroDuration(IsomtError):
    pass


class InvalidPlan(IsomtError):
    pass


class FileFormatError(IsomtError):
    """One or more records in an input file failed to parse.

    ``problems`` holds ``(location, message)`` pairs; location is a 1-based
    line number or a record id.
    """

    def __init__(self, path: str, problems: list[tuple[int | str, str]]):
        self.path = path
        self.problems = problems
        first = problems[0] if problems else ("?", "unknown error")
        more = f" (+{len(problems) - 1} more)" if len(problems) > 1 else ""
        super().__init__(f"{path}:{first[0]}: {first[1]}{more}")
