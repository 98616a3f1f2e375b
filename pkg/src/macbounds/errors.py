"""Exception hierarchy shared by every module."""

from __future__ import annotations


class MacBoundsError(ValueError):
    """Base class for all validation and precondition errors."""


class DimensionError(MacBoundsError):
    """Array shapes or alphabet sizes do not agree."""


class InvalidDistributionError(MacBoundsError):
    """Negative entries or a sum that is not one."""


class NonHermitianError(MacBoundsError):
    """Operator asymmetry exceeds the symmetrization tolerance."""


class InvalidStateError(MacBoundsError):
    """Operator is not a density operator (PSD, unit trace) or not a POVM."""


class SizeCapError(MacBoundsError):
    """A product construction would exceed the configured size cap."""


class UndefinedConditionalError(MacBoundsError):
    """A conditional at a zero-probability condition was used with nonzero weight."""


class PreconditionError(MacBoundsError):
    """A theorem's hypothesis does not hold.

    ``worst`` carries the index of the worst violating entry and ``amount``
    the size of the violation, so callers can print a replayable diagnosis.
    """

    def __init__(self, message: str, worst=None, amount: float | None = None):
        super().__init__(message)
        self.worst = worst
        self.amount = amount


class DominanceError(PreconditionError):
    """Pointwise or operator-order dominance required by a bound fails."""


class ParseError(MacBoundsError):
    """Malformed input file."""
