"""Exception hierarchy shared by the parametric planners and the oracle."""


class DomainError(ValueError):
    """An argument lies outside the range where the formula is defined."""


class PurificationError(RuntimeError):
    """Base class for planner failures: the target fidelity cannot be met."""


class UnreachableTargetError(PurificationError):
    """No number of rounds can reach the requested fidelity."""

    def __init__(self, message, best_fidelity=None):
        super().__init__(message)
        self.best_fidelity = best_fidelity


class BelowThresholdError(UnreachableTargetError):
    """Input GHZ weight is at or below the multipartite distillability threshold."""


class CapExceededError(PurificationError):
    """The round cap (or the floating point range) ran out before the target was met."""


class OracleCapError(ValueError):
    """A dense simulation would exceed the configured qubit cap."""
