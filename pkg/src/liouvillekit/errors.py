"""Exception hierarchy.

Every domain error carries a stable machine-readable ``token`` (the class
name) that the command line prints on stderr.
"""

from __future__ import annotations


class LiouvilleError(Exception):
    """Base class for all domain errors raised by the package."""

    @property
    def token(self) -> str:
        return type(self).__name__


class RefinementBudgetExceeded(LiouvilleError):
    pass


class BudgetExceeded(LiouvilleError):
    pass


class DivisorNotSeparatedFromZero(LiouvilleError):
    pass


class NotSeparatedFromZero(LiouvilleError):
    pass


class DomainError(LiouvilleError):
    pass


class AmbiguousNearestInteger(LiouvilleError):
    pass


class InvalidSchedule(LiouvilleError):
    pass


class ZeroDistance(LiouvilleError):
    pass


class WitnessSearchExhausted(LiouvilleError):
    """No witness found within budget. This is not a proof that x is not Liouville."""


class ImageCollapse(LiouvilleError):
    pass


class DomainEscape(LiouvilleError):
    pass


class NoRootInJ(LiouvilleError):
    pass


class NonMonotoneSlice(LiouvilleError):
    pass


class InvalidRelation(LiouvilleError):
    pass


class ZeroP(LiouvilleError):
    pass


class ConstantF(LiouvilleError):
    pass


class InvalidWitness(LiouvilleError):
    pass


class ParseError(LiouvilleError):
    pass
