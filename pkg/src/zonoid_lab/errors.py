"""Exception hierarchy shared across the package.

Every error raised on purpose derives from :class:`ZonoidLabError` so callers
(and the CLI) can separate expected validation failures from genuine bugs.
"""

from __future__ import annotations


class ZonoidLabError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(ZonoidLabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class RangeError(DomainError):
    """A target value lies outside the range of the map being inverted."""


class ValidationError(ZonoidLabError, ValueError):
    """A curve, boundary, grid or config object violates its invariants."""


class UnsupportedError(ZonoidLabError):
    """The inputs are well formed but the operation is not defined for them."""


class SingularCurvatureError(ZonoidLabError, ArithmeticError):
    """A second derivative needed in a denominator is numerically zero."""
