"""Exception types shared across the package."""


class InvalidConfigurationError(ValueError):
    """A layout, target, or experiment description violates its contract."""


class SingularGeometryError(ValueError):
    """A geometric quantity is undefined (zero range, coincident points)."""


class NumericDomainError(ValueError):
    """An intermediate value left its mathematical domain beyond tolerance."""
