"""Exception and warning types shared across the package."""


class WShiftError(Exception):
    """Base class for all errors raised by wshift."""


class DomainError(WShiftError, ValueError):
    """An argument lies outside the domain of an operation."""


class HorizonError(WShiftError, IndexError):
    """A query reaches beyond the finite horizon a table was built for."""

    def __init__(self, index, horizon):
        super().__init__(f"index {index} exceeds horizon {horizon}")
        self.index = index
        self.horizon = horizon


class SpecParseError(WShiftError, ValueError):
    """A weight-spec document is malformed.

    ``field`` names the offending key (``"runs[2].value"`` and the like) so
    the CLI can point at it.
    """

    def __init__(self, message, field=None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


class ConstructionError(WShiftError):
    """Parameters passed to a builder cannot produce a valid object."""


class InterferenceError(WShiftError):
    """Two terms of a candidate vector have overlapping supports."""


class PreconditionError(WShiftError):
    """A checker or builder precondition failed; carries the failing verdict."""

    def __init__(self, message, verdict=None):
        super().__init__(message)
        self.verdict = verdict


class PrecisionWarning(UserWarning):
    """An approximate comparison fell within the borderline tolerance."""
