"""Exception types shared across the package."""


class TwoCellIAError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(TwoCellIAError, ValueError):
    """An argument violates a documented precondition (bad shape, NaN, zero norm, ...)."""


class InfeasibleConfigError(TwoCellIAError):
    """The (M, N, K) antenna/user configuration cannot support the requested scheme."""


class DegenerateRealizationError(TwoCellIAError):
    """A channel realization hit a probability-zero numeric collapse.

    Monte Carlo callers are expected to redraw the trial and count the redraw.
    """


class InfeasibleRealizationError(DegenerateRealizationError):
    """The alignment system has an empty null space at numeric tolerance."""


class LocalityViolationError(TwoCellIAError):
    """A node computation touched CSI that the node never observed or received."""
