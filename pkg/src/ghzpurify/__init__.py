"""Purification of white-noise GHZ states: bipartite distill-and-teleport vs direct multipartite recurrence."""
from .bipartite import (
    PurificationPlan,
    StepResult,
    bbpssw_step,
    plan_bipartite,
    reduce_to_pair,
    teleport_fidelity,
)
from .errors import (
    BelowThresholdError,
    CapExceededError,
    DomainError,
    OracleCapError,
    PurificationError,
    UnreachableTargetError,
)
from .multipartite import (
    MultiPlan,
    MultiTrajectory,
    distillability_threshold,
    lambda_step,
    plan_multipartite,
    success_probability,
)
from .states import (
    BipartitePair,
    IterationState,
    NoiseSpec,
    convert_noise,
    fidelity_ghz,
    input_state,
)

__version__ = "0.1.0"
