"""Exception types shared across the package."""


class QPerceptError(ValueError):
    """Base class for all qpercept errors."""


class DimensionMismatch(QPerceptError):
    """Operands act on Hilbert spaces of different dimension."""


class ValidationError(QPerceptError):
    """Input violates a structural invariant (shape, positivity, partition...)."""


class InvalidExperience(QPerceptError):
    """An experience operator produced a measure below the negativity tolerance."""


class ZeroMeasure(QPerceptError):
    """A conditioning set or perception has zero (or undefined) measure."""


class DegenerateInput(QPerceptError):
    """The computation is undefined for this degenerate input."""
