"""Exception types shared across the package."""


class DomainError(ValueError):
    """A point lies outside the chart domain of a geometry."""


class ParameterError(ValueError):
    """An invalid combination of parameters (level, resolution, geometry)."""


class RankError(ArithmeticError):
    """A matrix that should have full rank is numerically singular."""


class ConsistencyError(ArithmeticError):
    """A computed quantity violates a hard mathematical bound.

    Raised e.g. when a transition amplitude exceeds one by more than
    roundoff, which signals a convention or truncation bug rather than
    a noisy result.
    """


class EnumerationCapError(RuntimeError):
    """Group enumeration exceeded its configured element cap."""
