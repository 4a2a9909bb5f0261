"""Exception hierarchy shared by every module in the package.

Two broad classes matter to callers (and to the CLI exit codes): input
problems (:class:`ValidationError` and subclasses) and numerical problems
(:class:`EstimabilityError`, :class:`SaturatedModelError`,
:class:`SearchFailureError`).
"""

from __future__ import annotations


class OofaError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(OofaError, ValueError):
    """Invalid input: bad arguments, malformed files, broken invariants."""


class CapacityError(ValidationError):
    """Component count outside the supported range (all m! orders are
    materialized downstream, so m is hard-capped)."""


class ParseError(ValidationError):
    """Malformed CSV or JSON input."""


class UnsupportedModelError(ValidationError):
    """The requested model family does not exist for the given m."""


class EstimabilityError(OofaError):
    """A model's design matrix is rank-deficient on the given design."""

    def __init__(self, message: str, dependent_columns: tuple[str, ...] = ()):
        super().__init__(message)
        self.dependent_columns = tuple(dependent_columns)


class SaturatedModelError(OofaError):
    """No usable error degrees of freedom: dispersion and information
    criteria are unavailable for this fit."""


class SearchFailureError(OofaError):
    """Design search could not find an estimable design to start from."""
