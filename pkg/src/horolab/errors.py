"""Exception hierarchy shared across horolab."""


class HorolabError(Exception):
    """Base class for all library errors."""


class ContractError(HorolabError, ValueError):
    """An input violates a structural invariant (e.g. non-unit determinant)."""


class DomainError(HorolabError, ValueError):
    """An argument lies outside the domain of an operation."""


class DegeneratePointError(DomainError):
    """A point is too close to the boundary sphere (or to the origin) to use."""


class ConstructionError(HorolabError):
    """A group presentation failed validation."""


class ClassificationError(HorolabError):
    """An isometry is not of the type an operation requires."""


class ResourceError(HorolabError):
    """An enumeration would exceed the configured resource cap."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class InsufficientDataError(HorolabError):
    """Too little data for a statistical estimate."""


class PreconditionError(HorolabError):
    """An experiment precondition is not met."""
