"""Exception and warning types raised by pairsel."""


class PairselError(Exception):
    """Base class for all pairsel errors."""


class DegenerateInputError(PairselError, ValueError):
    """A vector or column has zero variance (or all ranks tied).

    ``column`` holds the offending column index when it is known.
    """

    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class SingularPairError(PairselError, ValueError):
    """The (intercept, x_i, x_j) normal equations are singular."""

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class DomainError(PairselError, ValueError):
    """An argument lies outside the domain of a law or threshold."""


class TuningError(PairselError, RuntimeError):
    """Every grid point failed to converge.

    ``scores`` carries the score table collected before giving up.
    """

    def __init__(self, message, scores=None):
        super().__init__(message)
        self.scores = scores or []


class ThresholdSaturationWarning(UserWarning):
    """A screening threshold reached 1, so the screen admits (almost) no pair."""


class DegenerateThresholdWarning(UserWarning):
    """A threshold collapsed to 0, e.g. r0 when p = 1."""


class SubsetClampWarning(UserWarning):
    """The requested SIS subset size exceeded p and was clamped."""


class DimensionalityWarning(UserWarning):
    """log p exceeds n**(1/3); the Spearman law may be unreliable."""


class ConvergenceWarning(UserWarning):
    """An iterative solver stopped before meeting its tolerance."""


class SeparationWarning(UserWarning):
    """The logistic fit separated the classes; fitting stopped early."""
