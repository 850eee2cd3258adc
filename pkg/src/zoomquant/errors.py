"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Matrix shapes do not conform."""


class RankError(ValueError):
    """A matrix expected to have full rank does not."""


class SolverError(RuntimeError):
    """An iterative solver failed to converge."""


class ObservabilityError(ValueError):
    """The pair (C, A_d) is not observable."""


class ConditioningError(ValueError):
    """A computation is too ill-conditioned to trust in double precision."""


class InfeasibleRateError(ValueError):
    """A requested decay rate or level set cannot be certified."""


class PreconditionError(ValueError):
    """A structural precondition (nilpotency, rate ordering, ...) fails."""


class ConfigError(ValueError):
    """An experiment or plant configuration is malformed."""


class QuantizerOverflow(ArithmeticError):
    """A signal left the hypercube of its quantizer.

    Attributes
    ----------
    axis : int
        Offending coordinate.
    excess : float
        Amount by which ``|v - center|`` exceeds the half-width on that axis.
    which : str
        Label of the quantizer (``"output"``, ``"estimate"``, ``"input"``).
    """

    def __init__(self, axis, excess, which="output"):
        self.axis = axis
        self.excess = excess
        self.which = which
        super().__init__(
            f"{which} quantizer saturated on axis {axis} (excess {excess:.3e})"
        )
