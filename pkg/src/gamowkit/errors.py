"""Exception hierarchy shared by all gamowkit modules."""


class GamowkitError(Exception):
    """Base class for every error raised by the library."""


class GridError(GamowkitError, ValueError):
    """The energy grid does not support the requested operation."""


class ResolutionError(GamowkitError, ValueError):
    """Too few grid points for the requested operation."""


class ShapeError(GamowkitError, ValueError):
    """Lengths, bases or dimensions do not match."""


class ConfigError(GamowkitError, ValueError):
    """Invalid parameter or configuration value."""


class DomainError(GamowkitError, ValueError):
    """A complex energy lies outside the admissible region."""


class NotHardyError(GamowkitError, ValueError):
    """A wave function failed the Hardy-class test it was required to pass."""


class PoleEvaluationError(GamowkitError, ZeroDivisionError):
    """An S-matrix model was evaluated at (or numerically on) a pole."""


class ContourOverlapError(GamowkitError, ValueError):
    """Another singularity lies too close to a residue contour."""


class CausalityError(GamowkitError, ValueError):
    """A semigroup entry point received a negative time."""

    def __init__(self, t):
        self.t = t
        super().__init__(
            f"semigroup defined for t >= 0 only (0 <= t < inf); got t = {t!r}"
        )
