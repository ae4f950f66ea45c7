"""The (q, r, s) state family and fidelity / in-fidelity conversions.

Every state handled by the parametric code is a member of

    rho = q |GHZ><GHZ| + r * 1/2^n + s * rho_diag,
    rho_diag = (|0..0><0..0| + |1..1><1..1|) / 2,

with non-negative weights.  The weights are *not* renormalized after
post-selection: ``q + r + s`` is the trace, i.e. the accumulated
probability of success.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import DomainError

N_MIN = 2
N_MAX = 64
NORMALIZED_TOL = 1e-12


def _check_n(n: int, n_min: int = N_MIN) -> None:
    if isinstance(n, bool) or int(n) != n:
        raise DomainError(f"party count must be an integer, got {n!r}")
    if not n_min <= n <= N_MAX:
        raise DomainError(f"party count must lie in [{n_min}, {N_MAX}], got {n}")


def _check_unit(name: str, x: float) -> None:
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"{name} must lie in [0, 1], got {x!r}")


@dataclass(frozen=True)
class IterationState:
    """Weights of a (possibly sub-normalized) member of the GHZ/white/diag family."""

    n: int
    q: float
    r: float
    s: float
    normalized: bool = False

    def __post_init__(self):
        _check_n(self.n)
        for name in ("q", "r", "s"):
            v = getattr(self, name)
            if not v >= 0.0 or math.isinf(v):
                raise DomainError(f"weight {name} must be finite and >= 0, got {v!r}")
        if self.normalized and abs(self.trace - 1.0) > NORMALIZED_TOL:
            raise DomainError(f"state flagged normalized has trace {self.trace!r}")

    @property
    def trace(self) -> float:
        return self.q + self.r + self.s

    def normalize(self) -> "IterationState":
        t = self.trace
        if t <= 0.0:
            raise DomainError("cannot normalize a zero-trace state")
        return IterationState(self.n, self.q / t, self.r / t, self.s / t, normalized=True)

    def scaled(self, factor: float) -> "IterationState":
        return IterationState(self.n, self.q * factor, self.r * factor, self.s * factor)


@dataclass(frozen=True)
class BipartitePair:
    """Isotropic two-qubit state q |Phi+><Phi+| + (1-q)/4 * 1."""

    q: float

    def __post_init__(self):
        _check_unit("isotropic weight q", self.q)

    @property
    def fidelity(self) -> float:
        """Overlap with |Phi+>."""
        return (1.0 + 3.0 * self.q) / 4.0


@dataclass(frozen=True)
class NoiseSpec:
    """Noise level of the input state, given either as in-fidelity ``delta`` or GHZ weight ``q``."""

    n: int
    delta: Optional[float] = None
    q: Optional[float] = None


def input_state(n: int, q: float) -> IterationState:
    """The white-noise GHZ state q|GHZ><GHZ| + (1-q) 1/2^n."""
    _check_n(n)
    _check_unit("q", q)
    return IterationState(n, q, 1.0 - q, 0.0, normalized=True)


def fidelity_ghz(state: IterationState) -> float:
    """GHZ fidelity of the normalized state.

    <GHZ|1/2^n|GHZ> = 2^-n and <GHZ|rho_diag|GHZ> = 1/2 for every n.
    """
    t = state.trace
    if t <= 0.0:
        raise DomainError("fidelity of a zero-trace state is undefined")
    return (state.q + state.r / 2.0**state.n + state.s / 2.0) / t


def max_delta(n: int) -> float:
    """Largest in-fidelity reachable by white noise, attained at q = 0."""
    return 1.0 - 2.0**-n


def delta_from_q(n: int, q: float) -> float:
    _check_n(n)
    _check_unit("q", q)
    return max_delta(n) * (1.0 - q)


def q_from_delta(n: int, delta: float) -> float:
    _check_n(n)
    dmax = max_delta(n)
    if not (0.0 <= delta <= dmax):
        raise DomainError(f"in-fidelity must lie in [0, {dmax!r}] for n={n}, got {delta!r}")
    # clamp: delta == dmax can round to a tiny negative q
    return min(1.0, max(0.0, 1.0 - delta / dmax))


def convert_noise(spec: NoiseSpec) -> NoiseSpec:
    """Fill in whichever of ``delta`` / ``q`` is missing."""
    if (spec.delta is None) == (spec.q is None):
        raise DomainError("exactly one of delta and q must be given")
    if spec.q is not None:
        return NoiseSpec(spec.n, delta=delta_from_q(spec.n, spec.q), q=spec.q)
    return NoiseSpec(spec.n, delta=spec.delta, q=q_from_delta(spec.n, spec.delta))
