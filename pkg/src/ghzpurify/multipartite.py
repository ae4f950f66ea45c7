"""Direct multipartite recurrence purification.

Every party applies a CNOT from its qubit of copy one (control) onto its
qubit of copy two (target), measures the target in the Z basis, and the
round is kept only if all n outcomes are 0.  On the (q, r, s) family the
unnormalized post-selected state is again in the family, which is what
:func:`lambda_step` computes.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

from scipy.optimize import bisect

from .errors import BelowThresholdError, CapExceededError, DomainError, UnreachableTargetError
from .states import NORMALIZED_TOL, IterationState, _check_n, _check_unit, fidelity_ghz, input_state

K_MAX_DEFAULT = 64
TRACE_FLOOR = 1e-300
RECURRENCES = ("exact", "printed")


@dataclass(frozen=True)
class MultiTrajectory:
    states: List[IterationState]
    success_probs: List[float]
    fidelities: List[float]

    @property
    def k(self) -> int:
        return len(self.states) - 1


@dataclass(frozen=True)
class MultiPlan:
    n: int
    epsilon: float
    k: int
    cost_paper: float
    cost_expected: float
    final_fidelity: float
    trajectory: MultiTrajectory
    recurrence: str = "exact"


def lambda_step(state: IterationState, recurrence: str = "exact") -> IterationState:
    """Post-selected (unnormalized) weights after one round on two copies of ``state``.

    Pairwise images under the round map, with 1 the unnormalized identity::

        GHZ x GHZ          -> GHZ / 2
        1 x 1              -> 1
        GHZ x 1, 1 x GHZ   -> diag
        GHZ x diag, diag x GHZ, diag x diag -> diag / 2
        1 x diag, diag x 1 -> diag

    Collecting both orderings of every cross term gives::

        q -> q^2 / 2
        r -> r^2 / 2^n
        s -> s^2 / 2 + s q + 2 (s r + q r) / 2^n

    ``recurrence="printed"`` instead uses the commonly quoted
    s -> (s^2 + s q)/2 + (s r + 2 q r)/2^n, which counts the GHZ x diag and
    1 x diag cross terms once.  Both agree whenever s = 0.
    """
    q, r, s = state.q, state.r, state.s
    d = 2.0**state.n
    if recurrence == "exact":
        s_next = 0.5 * s * s + s * q + 2.0 * (s * r + q * r) / d
    elif recurrence == "printed":
        s_next = 0.5 * (s * s + s * q) + (s * r + 2.0 * q * r) / d
    else:
        raise DomainError(f"unknown recurrence {recurrence!r}; expected one of {RECURRENCES}")
    return IterationState(state.n, 0.5 * q * q, r * r / d, s_next)


def success_probability(state: IterationState, recurrence: str = "exact") -> float:
    """Probability that all parties measure 0, for a normalized input."""
    if abs(state.trace - 1.0) > NORMALIZED_TOL:
        raise DomainError(f"success probability needs a normalized state, trace={state.trace!r}")
    return lambda_step(state, recurrence).trace


def success_probability_white(n: int, q: float) -> float:
    """Closed form for white-noise input: q^2/2 + 2q(1-q)/2^n + (1-q)^2/2^n."""
    _check_n(n)
    _check_unit("q", q)
    d = 2.0**n
    return 0.5 * q * q + 2.0 * q * (1.0 - q) / d + (1.0 - q) ** 2 / d


def fidelity_upper_bound(state: IterationState) -> float:
    """Bound on the GHZ fidelity of this state and of every later round.

    With u = s/q and v = r/q the normalized fidelity is
    (1 + v/2^n + u/2) / (1 + v + u), which for fixed u is at most
    (1 + u/2)/(1 + u); u never decreases under either recurrence.
    """
    q, s = state.q, state.s
    if q + s <= 0.0:
        return 2.0**-state.n
    # same value as (1 + u/2)/(1 + u), without overflow for subnormal q
    return (q + 0.5 * s) / (q + s)


def run_rounds(
    n: int, q0: float, rounds: int, recurrence: str = "exact", *, renormalize: bool = False
) -> MultiTrajectory:
    """Apply ``rounds`` rounds unconditionally, starting from white noise.

    With ``renormalize`` every stored state has unit trace, which keeps long
    runs clear of underflow; success probabilities are unaffected.
    """
    if rounds < 0:
        raise DomainError("rounds must be >= 0")
    state = input_state(n, q0)
    states = [state]
    probs: List[float] = []
    fids = [fidelity_ghz(state)]
    for _ in range(rounds):
        nxt = lambda_step(state, recurrence)
        if nxt.trace < TRACE_FLOOR:
            raise CapExceededError(f"trace underflow after {len(probs)} rounds")
        probs.append(nxt.trace / state.trace**2)
        fids.append(fidelity_ghz(nxt))
        if renormalize:
            nxt = nxt.normalize()
        states.append(nxt)
        state = nxt
    return MultiTrajectory(states, probs, fids)


def _costs(traj: MultiTrajectory) -> Tuple[float, float]:
    k = traj.k
    cost_paper = 1.0 / traj.states[-1].trace
    cost_expected = 2.0**k
    for p in traj.success_probs:
        cost_expected /= p
    return cost_paper, cost_expected


def plan_multipartite(
    n: int,
    q0: float,
    epsilon: float,
    k_max: int = K_MAX_DEFAULT,
    *,
    recurrence: str = "exact",
) -> MultiPlan:
    """Iterate rounds until the normalized GHZ fidelity reaches 1 - epsilon.

    Two costs are reported.  ``cost_paper`` is 1/(q + r + s) of the final
    unnormalized weights.  ``cost_expected`` is 2^k / prod(P_i), the mean
    number of inputs a binary tree of rounds consumes, each P_i taken on
    the normalized round input.

    Raises
    ------
    BelowThresholdError
        Target unreachable and q0 is at or below ``2 / (2^n - 2)``.
    UnreachableTargetError
        Target unreachable although q0 is above the threshold: the
        fidelity peaks and then decays towards 1/2.
    CapExceededError
        ``k_max`` rounds, or the floating point range, ran out.
    """
    _check_n(n)
    _check_unit("q0", q0)
    if not (0.0 < epsilon < 1.0):
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    if k_max < 0:
        raise DomainError("k_max must be >= 0")

    target = 1.0 - epsilon
    state = input_state(n, q0)
    states = [state]
    probs: List[float] = []
    fids = [fidelity_ghz(state)]
    while fids[-1] < target:
        bound = fidelity_upper_bound(state)
        if bound < target:
            best = max(fids)
            msg = (
                f"target fidelity {target:.6g} unreachable for n={n}, q0={q0!r}: "
                f"best {best:.6g} after {fids.index(best)} rounds, later rounds bounded by {bound:.6g}"
            )
            if q0 <= threshold_closed_form(n):
                raise BelowThresholdError(msg, best_fidelity=best)
            raise UnreachableTargetError(msg, best_fidelity=best)
        if len(probs) >= k_max:
            raise CapExceededError(f"{k_max} rounds reach fidelity {fids[-1]:.6g} < {target:.6g}")
        nxt = lambda_step(state, recurrence)
        if nxt.trace < TRACE_FLOOR:
            raise CapExceededError(f"trace underflow after {len(probs)} rounds")
        probs.append(nxt.trace / state.trace**2)
        fids.append(fidelity_ghz(nxt))
        states.append(nxt)
        state = nxt

    traj = MultiTrajectory(states, probs, fids)
    cost_paper, cost_expected = _costs(traj)
    return MultiPlan(
        n=n,
        epsilon=epsilon,
        k=traj.k,
        cost_paper=cost_paper,
        cost_expected=cost_expected,
        final_fidelity=fids[-1],
        trajectory=traj,
        recurrence=recurrence,
    )


def threshold_closed_form(n: int) -> float:
    """Distillability threshold 2 / (2^n - 2) on the GHZ weight."""
    _check_n(n)
    return 2.0 / (2.0**n - 2.0)


def normalized_weight_gain(n: int, q: float) -> float:
    """Change of the normalized GHZ weight over one round on white-noise input."""
    return 0.5 * q * q / success_probability_white(n, q) - q


def normalized_fidelity_gain(n: int, q: float) -> float:
    """Change of the GHZ fidelity over one round on white-noise input."""
    out = lambda_step(input_state(n, q))
    return fidelity_ghz(out) - (q + (1.0 - q) / 2.0**n)


def _bisect_root(func, lo: float, hi: float, tol: float) -> float:
    if func(hi) <= 0.0:
        # no crossing inside the bracket: the only non-trivial fixed point is q = 1
        return 1.0
    return float(bisect(func, lo, hi, xtol=tol, maxiter=200))


def distillability_threshold(n: int, tol: float = 1e-12) -> Tuple[float, float]:
    """Closed-form and bisected threshold on the GHZ weight.

    The numeric value is the unstable fixed point of the one-round map
    q -> (q^2/2) / P_succ(q) on white-noise inputs, bracketed in
    [1e-12, 0.9].  For n = 2 the map has no interior fixed point and both
    values are 1.
    """
    _check_n(n)
    if not tol > 0.0:
        raise DomainError("tol must be positive")
    numeric = _bisect_root(lambda q: normalized_weight_gain(n, q), 1e-12, 0.9, tol)
    return threshold_closed_form(n), numeric


def fidelity_crossover(n: int, tol: float = 1e-16) -> float:
    """Input weight above which one round raises the GHZ fidelity.

    Lies far below the weight threshold, because early rounds convert
    white noise into the classically correlated diag component, which
    carries fidelity 1/2.
    """
    _check_n(n)
    return _bisect_root(lambda q: normalized_fidelity_gain(n, q), 1e-12, 0.9, tol)


def peak_fidelity(n: int, q0: float, k_max: int = K_MAX_DEFAULT, recurrence: str = "exact") -> Tuple[int, float]:
    """Round index and value of the highest fidelity along the trajectory."""
    state = input_state(n, q0)
    best_k, best = 0, fidelity_ghz(state)
    for k in range(1, k_max + 1):
        if fidelity_upper_bound(state) <= best:
            break
        state = lambda_step(state, recurrence)
        if state.trace < TRACE_FLOOR:
            break
        f = fidelity_ghz(state)
        if f > best:
            best_k, best = k, f
    return best_k, best
