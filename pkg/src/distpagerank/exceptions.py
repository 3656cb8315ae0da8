"""Exception types raised across the package."""


class DistPageRankError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(DistPageRankError):
    """Malformed input text. ``line`` is 1-based, or None if not applicable."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(DistPageRankError, ValueError):
    """Input is well-formed but violates a structural requirement."""


class UnrepairableError(DistPageRankError):
    """A dangling page cannot be repaired under the requested policy."""

    def __init__(self, page):
        self.page = page
        super().__init__(
            f"dangling page {page + 1} has no inlinks; back-link repair is impossible"
        )


class SingularBlockError(DistPageRankError):
    """A diagonal block of the step-2 system is numerically singular."""

    def __init__(self, group):
        self.group = group
        super().__init__(f"step-2 block of group {group} is numerically singular")
