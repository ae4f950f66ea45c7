"""Distill-then-teleport strategy.

The dealer turns each noisy N-party state into an isotropic pair with one
other party, runs recurrence distillation (bilateral CNOT, measure the
targets, keep the (0, 0) outcome) on each link, and finally teleports
N - 1 qubits of a locally prepared GHZ state through the distilled pairs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional

from .errors import CapExceededError, DomainError, UnreachableTargetError
from .states import BipartitePair, _check_n, _check_unit, delta_from_q

# below this in-fidelity the rational form of the step loses digits
_DELTA_SWITCH = 1e-6
UNSTABLE_FIXED_POINT = 1.0 / 3.0
K_MAX_DEFAULT = 64

SUCCESS_MODELS = ("nominal", "exact")


@dataclass(frozen=True)
class StepResult:
    q_next: float
    p_success: float
    cost_factor: float
    delta_next: float


@dataclass(frozen=True)
class PurificationPlan:
    n: int
    epsilon: float
    k: int
    trajectory: List[float]
    deltas: List[float]
    step_costs: List[float]
    expected_cost: float
    lower_bound_cost: float
    closed_form_k: Optional[int]
    closed_form_cost: Optional[float]
    asymptotic_cost: Optional[float]
    final_fidelity: float
    success_model: str = "nominal"
    keep_both: bool = False


def reduce_to_pair(n: int, q: float) -> BipartitePair:
    """Pair left between the dealer and one partner after the others measure in the X basis.

    The remaining n - 2 parties measure in the |+>, |-> basis; the dealer
    applies Z when an odd number of |-> outcomes is reported.  Every
    branch then leaves q|Phi+><Phi+| + (1-q)/4 * 1, so the white-noise
    weight carries over unchanged.  One N-party state is consumed per pair.
    """
    _check_n(n, n_min=3)
    _check_unit("q", q)
    return BipartitePair(q)


def _next_delta(delta: float) -> float:
    return delta * (4.0 - delta) / (3.0 * (2.0 - 2.0 * delta + delta * delta))


def step_success_probability(q: float, model: str = "nominal", keep_both: bool = False) -> float:
    """Probability that one distillation round on two pairs of weight ``q`` is kept.

    ``model="nominal"`` uses (1+q)/4: the dealer sees 0 with probability 1/2 and
    the partner with probability (1+q)/2.  ``model="exact"`` uses the value
    of the dense simulation, (1+q^2)/4.  ``keep_both`` also accepts the
    (1, 1) outcome, which doubles either value.
    """
    if model == "nominal":
        p = (1.0 + q) / 4.0
    elif model == "exact":
        p = (1.0 + q * q) / 4.0
    else:
        raise DomainError(f"unknown success model {model!r}; expected one of {SUCCESS_MODELS}")
    return 2.0 * p if keep_both else p


def bbpssw_step(q: float, model: str = "nominal", keep_both: bool = False) -> StepResult:
    """One recurrence round: q -> (4q^2 + 2q) / (3(q^2 + 1))."""
    _check_unit("q", q)
    delta = 1.0 - q
    if delta < _DELTA_SWITCH:
        delta_next = _next_delta(delta)
        q_next = 1.0 - delta_next
    else:
        q_next = (4.0 * q * q + 2.0 * q) / (3.0 * (q * q + 1.0))
        delta_next = 1.0 - q_next
    p = step_success_probability(q, model, keep_both)
    return StepResult(q_next=q_next, p_success=p, cost_factor=2.0 / p, delta_next=delta_next)


def teleport_fidelity(q: float, n: int) -> float:
    """GHZ fidelity after teleporting n - 1 qubits through isotropic pairs of weight q."""
    _check_n(n)
    _check_unit("q", q)
    m = n - 1
    return 0.5 * (q**m + ((1.0 + q) / 2.0) ** m)


def closed_form_rounds(n: int, q0: float, epsilon: float) -> Optional[int]:
    """Small-error round estimate k >= 1 + log2[Delta0 (n-1) / eps] / log2(3/2).

    ``Delta0 = 1 - q0 = 2^n/(2^n - 1) * delta``.  Returns None for q0 = 1.
    The estimate assumes F_out ~ 1 - (n-1) Delta_k; the first order
    expansion of the teleported fidelity is 1 - 3/4 (n-1) Delta_k, so the
    estimate tends to exceed the exact round count by one or two.
    """
    d0 = 1.0 - q0
    if d0 <= 0.0:
        return None
    x = d0 * (n - 1) / epsilon
    k = 1.0 + math.log2(x) / math.log2(1.5)
    return max(0, math.ceil(k))


def closed_form_cost(n: int, q0: float, epsilon: float) -> Optional[float]:
    """4 (n-1) [Delta0 (n-1) / eps]^(2 / log2(3/2)), i.e. 4^k (n-1) at the estimated k."""
    d0 = 1.0 - q0
    if d0 <= 0.0:
        return None
    x = d0 * (n - 1) / epsilon
    return 4.0 * (n - 1) * x ** (2.0 / math.log2(1.5))


def asymptotic_cost(n: int, delta: float, epsilon: float) -> float:
    """Large-n approximation 4 n^4.42 (delta/eps)^3.42 (informational only)."""
    return 4.0 * n**4.42 * (delta / epsilon) ** 3.42


def plan_bipartite(
    n: int,
    q0: float,
    epsilon: float,
    k_max: int = K_MAX_DEFAULT,
    *,
    success_model: str = "nominal",
    keep_both: bool = False,
) -> PurificationPlan:
    """Smallest round count whose teleported GHZ fidelity reaches 1 - epsilon.

    Rounds are chosen by iterating the exact recurrence, not the
    small-error closed form; the latter is reported for comparison.

    Raises
    ------
    UnreachableTargetError
        q0 <= 1/3 and the target is not already met; the recurrence cannot
        raise q from there.
    CapExceededError
        ``k_max`` rounds do not suffice.
    """
    _check_n(n)
    _check_unit("q0", q0)
    if not (0.0 < epsilon < 1.0):
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    if k_max < 0:
        raise DomainError("k_max must be >= 0")

    target = 1.0 - epsilon
    q = q0
    delta = 1.0 - q0
    trajectory = [q]
    deltas = [delta]
    step_costs: List[float] = []
    fid = teleport_fidelity(q, n)
    if fid < target and q0 <= UNSTABLE_FIXED_POINT:
        raise UnreachableTargetError(
            f"q0={q0!r} <= 1/3: recurrence distillation cannot improve the pairs "
            f"(teleported fidelity {fid:.6g} < {target:.6g})",
            best_fidelity=fid,
        )
    while fid < target:
        if len(step_costs) >= k_max:
            raise CapExceededError(
                f"{k_max} rounds reach fidelity {fid:.6g} < {target:.6g}"
            )
        step = bbpssw_step(q, success_model, keep_both)
        step_costs.append(step.cost_factor)
        q, delta = step.q_next, step.delta_next
        trajectory.append(q)
        deltas.append(delta)
        fid = teleport_fidelity(q, n)

    k = len(step_costs)
    expected = float(n - 1)
    for c in step_costs:
        expected *= c
    d_in = delta_from_q(n, q0)
    return PurificationPlan(
        n=n,
        epsilon=epsilon,
        k=k,
        trajectory=trajectory,
        deltas=deltas,
        step_costs=step_costs,
        expected_cost=expected,
        lower_bound_cost=4.0**k * (n - 1),
        closed_form_k=closed_form_rounds(n, q0, epsilon),
        closed_form_cost=closed_form_cost(n, q0, epsilon),
        asymptotic_cost=asymptotic_cost(n, d_in, epsilon),
        final_fidelity=fid,
        success_model=success_model,
        keep_both=keep_both,
    )
