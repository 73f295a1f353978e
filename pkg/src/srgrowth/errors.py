"""Exception hierarchy for the toolkit.

Two broad families matter to callers: ``InputError`` covers malformed or
unreachable inputs (bad JSON, unknown repositories, network trouble), while
``AnalysisError`` covers data that is well formed but unfit for the requested
computation (too few points, degenerate variance, numeric breakdown).  The
command line maps the families to exit codes 2 and 3 respectively.
"""

from __future__ import annotations


class SrgrowthError(Exception):
    """Base class for all toolkit errors."""


class InputError(SrgrowthError):
    """Input could not be read or understood."""


class AnalysisError(SrgrowthError):
    """Input was readable but violates a precondition of the analysis."""


class ParseError(InputError):
    """Malformed issue document.

    Carries ``offset``, the byte offset at which decoding failed.
    """

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class UnknownRepoError(InputError):
    """The tracker reported that the repository does not exist."""


class RateLimitError(InputError):
    """Tracker rate limit exhausted and retries did not recover."""


class NetworkError(InputError):
    """Transport failure or unexpected response while fetching issues."""


class ParameterDomainError(AnalysisError):
    """Parameter vector has the wrong arity or lies outside the model domain."""


class InsufficientDataError(AnalysisError):
    """Too few observations for the requested computation."""


class DegenerateDataError(AnalysisError):
    """Observed values carry no variance, so the statistic is undefined."""


class EmptySeriesError(AnalysisError):
    """No issues fall inside the requested observation window."""


class NumericError(AnalysisError):
    """A computation produced non-finite values where finite ones are required."""


class SegmentCoverageError(AnalysisError):
    """A segment is missing results for a model that should be ranked."""
