"""Dense density-matrix simulator used as ground truth for the closed forms.

Conventions
-----------
* Qubit 0 is the most significant bit of a basis index.
* In :func:`lambda_oracle_pair` the 2n qubits are ordered
  (copy1 party1, ..., copy1 party n, copy2 party1, ..., copy2 party n);
  copy 1 holds the controls, copy 2 the targets.
* Teleportation uses |Phi+> as the resource pair.  Bell outcomes
  Phi+, Phi-, Psi+, Psi- are corrected with 1, Z, X, ZX on the receiver.
* The ``cap`` arguments bound the number of qubits a composite operation
  may take as input (10 by default, so lambda_oracle handles n <= 5).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, List, NamedTuple, Sequence, Tuple

import numpy as np

from .errors import DomainError, OracleCapError

DEFAULT_CAP = 10
HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
P0 = np.array([[1, 0], [0, 0]], dtype=complex)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
KET_PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
KET_MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)


@dataclass(frozen=True)
class DensityMatrix:
    data: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.data, dtype=complex)
        dim = a.shape[0]
        if a.ndim != 2 or a.shape[1] != dim or dim & (dim - 1) or dim == 0:
            raise DomainError(f"density matrix must be square with power-of-two size, got {a.shape}")
        object.__setattr__(self, "data", a)

    @property
    def num_qubits(self) -> int:
        return self.data.shape[0].bit_length() - 1

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def trace(self) -> float:
        return float(np.real(np.trace(self.data)))

    def normalized(self) -> "DensityMatrix":
        return DensityMatrix(self.data / self.trace())

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.data - self.data.conj().T)))

    def min_eigenvalue(self) -> float:
        h = 0.5 * (self.data + self.data.conj().T)
        return float(np.linalg.eigvalsh(h)[0])

    def is_physical(self, tol: float = HERMITIAN_TOL, max_trace: float = 1.0 + 1e-12) -> bool:
        """Hermitian, PSD and trace in [0, max_trace], all up to ``tol``."""
        tr = np.trace(self.data)
        return (
            self.hermiticity_error() <= tol
            and self.min_eigenvalue() >= -PSD_TOL
            and abs(tr.imag) <= tol
            and -tol <= tr.real <= max_trace
        )


@dataclass(frozen=True)
class PureState:
    amplitudes: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.amplitudes, dtype=complex).ravel()
        if abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise DomainError("pure state must have unit norm")
        object.__setattr__(self, "amplitudes", v)

    @property
    def num_qubits(self) -> int:
        return self.amplitudes.size.bit_length() - 1

    def projector(self) -> DensityMatrix:
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class Check:
    name: str
    max_error: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.max_error <= self.tol)


@dataclass
class VerificationReport:
    checks: List[Check] = field(default_factory=list)

    def add(self, name: str, max_error: float, tol: float) -> Check:
        c = Check(name, float(max_error), tol)
        self.checks.append(c)
        return c

    def extend(self, other: "VerificationReport") -> None:
        self.checks.extend(other.checks)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> List[Check]:
        return [c for c in self.checks if not c.passed]


# ---------------------------------------------------------------------------
# primitives


def _check_cap(num_qubits: int, cap: int) -> None:
    if num_qubits > cap:
        raise OracleCapError(f"dense simulation of {num_qubits} qubits exceeds the cap of {cap}")


def ghz_state(n: int) -> PureState:
    v = np.zeros(2**n, dtype=complex)
    v[0] = v[-1] = 1.0 / np.sqrt(2.0)
    return PureState(v)


def bell_states() -> dict:
    s = 1.0 / np.sqrt(2.0)
    return {
        "phi+": PureState(np.array([s, 0, 0, s])),
        "phi-": PureState(np.array([s, 0, 0, -s])),
        "psi+": PureState(np.array([0, s, s, 0])),
        "psi-": PureState(np.array([0, s, -s, 0])),
    }


BELL_CORRECTIONS = {"phi+": I2, "phi-": Z, "psi+": X, "psi-": Z @ X}


def diag_ghz(n: int) -> np.ndarray:
    """(|0..0><0..0| + |1..1><1..1|) / 2."""
    m = np.zeros((2**n, 2**n), dtype=complex)
    m[0, 0] = m[-1, -1] = 0.5
    return m


def tensor(*mats: np.ndarray) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def apply_operator(rho: np.ndarray, op: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    """Return K rho K^dagger with K = ``op`` acting on ``qubits`` (in that order)."""
    n = rho.shape[0].bit_length() - 1
    k = len(qubits)
    if op.shape != (2**k, 2**k):
        raise DomainError("operator size does not match the qubit list")
    if len(set(qubits)) != k or any(not 0 <= q < n for q in qubits):
        raise DomainError(f"invalid qubit list {qubits!r} for {n} qubits")
    t = rho.reshape((2,) * (2 * n))
    g = op.reshape((2,) * (2 * k))
    # K on row indices
    t = np.tensordot(g, t, axes=(list(range(k, 2 * k)), list(qubits)))
    t = np.moveaxis(t, list(range(k)), list(qubits))
    # K^dagger on column indices
    cols = [n + q for q in qubits]
    t = np.tensordot(t, g.conj(), axes=(cols, list(range(k, 2 * k))))
    t = np.moveaxis(t, list(range(2 * n - k, 2 * n)), cols)
    return t.reshape(2**n, 2**n)


def partial_trace(rho: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    """Reduced matrix on ``keep`` (output order follows ``keep``)."""
    n = rho.shape[0].bit_length() - 1
    keep = list(keep)
    drop = [q for q in range(n) if q not in keep]
    t = rho.reshape((2,) * (2 * n))
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    row = [letters[i] for i in range(n)]
    col = [letters[n + i] for i in range(n)]
    for q in drop:
        col[q] = row[q]
    out = "".join(row[q] for q in keep) + "".join(col[q] for q in keep)
    t = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    d = 2 ** len(keep)
    return t.reshape(d, d)


def permute_qubits(rho: np.ndarray, order: Sequence[int]) -> np.ndarray:
    """Reorder qubits so that new qubit i is old qubit ``order[i]``."""
    n = rho.shape[0].bit_length() - 1
    t = rho.reshape((2,) * (2 * n))
    t = np.transpose(t, list(order) + [n + o for o in order])
    return t.reshape(2**n, 2**n)


def fidelity(rho: DensityMatrix, psi: PureState) -> float:
    """<psi|rho|psi>; the imaginary part must vanish."""
    if rho.dim != psi.amplitudes.size:
        raise DomainError(f"dimension mismatch: {rho.dim} vs {psi.amplitudes.size}")
    v = psi.amplitudes
    val = np.vdot(v, rho.data @ v)
    if abs(val.imag) > 1e-12:
        raise DomainError(f"overlap has imaginary part {val.imag!r}")
    return float(val.real)


# ---------------------------------------------------------------------------
# the state family and the multipartite round


def build_state(n: int, q: float, r: float, s: float, cap: int = DEFAULT_CAP) -> DensityMatrix:
    """q |GHZ><GHZ| + r 1/2^n + s diag as an explicit matrix."""
    if n < 2:
        raise DomainError("need at least two parties")
    _check_cap(n, cap)
    if min(q, r, s) < 0:
        raise DomainError("weights must be non-negative")
    dim = 2**n
    m = q * ghz_state(n).projector().data + (r / dim) * np.eye(dim, dtype=complex) + s * diag_ghz(n)
    return DensityMatrix(m)


def _round_operator_targets(n: int) -> Tuple[List[Tuple[int, int]], List[int], List[int]]:
    pairs = [(i, n + i) for i in range(n)]
    return pairs, list(range(n)), list(range(n, 2 * n))


def lambda_oracle_pair(a: np.ndarray, b: np.ndarray, cap: int = DEFAULT_CAP) -> DensityMatrix:
    """Round map on two possibly different n-qubit operators (copy 1 = ``a``, copy 2 = ``b``).

    Forms a x b, applies one CNOT per party (copy-1 control, copy-2 target),
    projects every target onto |0> and traces the targets out.  The result
    is unnormalized; its trace is the success probability times tr(a) tr(b).
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise DomainError("both copies must have the same size")
    n = a.shape[0].bit_length() - 1
    _check_cap(2 * n, cap)
    rho = np.kron(a, b)
    pairs, controls, targets = _round_operator_targets(n)
    for c, t in pairs:
        rho = apply_operator(rho, CNOT, [c, t])
    for t in targets:
        rho = apply_operator(rho, P0, [t])
    return DensityMatrix(partial_trace(rho, controls))


def lambda_oracle(rho: DensityMatrix, cap: int = DEFAULT_CAP) -> Tuple[DensityMatrix, float]:
    if rho.trace() <= 0:
        raise DomainError("input must have positive trace")
    out = lambda_oracle_pair(rho.data, rho.data, cap=cap)
    return out, out.trace()


def family_basis(n: int) -> List[np.ndarray]:
    dim = 2**n
    return [ghz_state(n).projector().data, np.eye(dim, dtype=complex) / dim, diag_ghz(n)]


def extract_weights(rho: DensityMatrix) -> Tuple[Tuple[float, float, float], float]:
    """Least-squares (q, r, s) of ``rho`` in the family and the max-norm residual."""
    n = rho.num_qubits
    basis = family_basis(n)
    gram = np.array([[np.vdot(bi, bj).real for bj in basis] for bi in basis])
    rhs = np.array([np.vdot(bi, rho.data).real for bi in basis])
    w = np.linalg.solve(gram, rhs)
    fit = sum(wi * bi for wi, bi in zip(w, basis))
    residual = float(np.max(np.abs(rho.data - fit)))
    return (float(w[0]), float(w[1]), float(w[2])), residual


def verify_lambda_identities(
    n: int,
    tol: float = 1e-10,
    *,
    samples: int = 100,
    seed: int = 20110512,
    cap: int = DEFAULT_CAP,
    recurrence: str = "exact",
) -> VerificationReport:
    """Check the pairwise images of the round map, the success probability and the recurrence."""
    from .multipartite import lambda_step, success_probability_white
    from .states import IterationState

    _check_cap(2 * n, cap)
    rep = VerificationReport()
    dim = 2**n
    ghz = ghz_state(n).projector().data
    ident = np.eye(dim, dtype=complex)
    diag = diag_ghz(n)

    def err(a, b, expected):
        out = lambda_oracle_pair(a, b, cap=cap)
        return float(np.max(np.abs(out.data - expected)))

    tag = f"n={n}"
    rep.add(f"{tag} L[1 x 1] = 1", err(ident, ident, ident), tol)
    rep.add(f"{tag} L[GHZ x GHZ] = GHZ/2", err(ghz, ghz, ghz / 2), tol)
    rep.add(f"{tag} L[GHZ x 1] = L[1 x GHZ] = diag",
            max(err(ghz, ident, diag), err(ident, ghz, diag)), tol)
    rep.add(f"{tag} L[1 x diag] = L[diag x 1] = diag",
            max(err(ident, diag, diag), err(diag, ident, diag)), tol)
    rep.add(f"{tag} L[GHZ x diag] = L[diag x GHZ] = diag/2",
            max(err(ghz, diag, diag / 2), err(diag, ghz, diag / 2)), tol)
    rep.add(f"{tag} L[diag x diag] = diag/2", err(diag, diag, diag / 2), tol)

    worst = 0.0
    for q in np.linspace(0.0, 1.0, 11):
        _, tr = lambda_oracle(build_state(n, q, 1.0 - q, 0.0, cap=cap), cap=cap)
        worst = max(worst, abs(tr - success_probability_white(n, float(q))))
    rep.add(f"{tag} P_succ on white-noise q-grid", worst, tol)

    rng = np.random.default_rng(seed)
    worst_w = worst_res = worst_phys = 0.0
    for _ in range(samples):
        q, r, s = rng.dirichlet([1.0, 1.0, 1.0]) * rng.uniform(0.2, 1.0)
        out, _ = lambda_oracle(build_state(n, q, r, s, cap=cap), cap=cap)
        (wq, wr, ws), res = extract_weights(out)
        ref = lambda_step(IterationState(n, q, r, s), recurrence)
        worst_w = max(worst_w, abs(wq - ref.q), abs(wr - ref.r), abs(ws - ref.s))
        worst_res = max(worst_res, res)
        worst_phys = max(worst_phys, out.hermiticity_error(), max(0.0, -out.min_eigenvalue()))
    rep.add(f"{tag} recurrence ({recurrence}) vs extracted weights", worst_w, tol)
    rep.add(f"{tag} family closure residual", worst_res, tol)
    rep.add(f"{tag} outputs Hermitian and PSD", worst_phys, tol)
    return rep


# ---------------------------------------------------------------------------
# bipartite preparation, distillation and teleportation


def isotropic_pair(q: float) -> DensityMatrix:
    phi = bell_states()["phi+"].projector().data
    return DensityMatrix(q * phi + (1.0 - q) / 4.0 * np.eye(4, dtype=complex))


class Branch(NamedTuple):
    outcomes: Tuple[int, ...]
    probability: float
    state: DensityMatrix


def prepare_pair_branches(n: int, q: float, cap: int = DEFAULT_CAP) -> List[Branch]:
    """Every X-basis measurement record of parties 3..n with the dealer's parity fix applied.

    Outcome 0 means |+>, 1 means |->.  The dealer (qubit 0) applies Z when
    the number of |-> results is odd.  Returned states are normalized.
    """
    if n < 3:
        raise DomainError("preparation needs at least three parties")
    _check_cap(n, cap)
    rho = build_state(n, q, 1.0 - q, 0.0, cap=cap).data
    kets = (KET_PLUS, KET_MINUS)
    branches = []
    for rec in itertools.product((0, 1), repeat=n - 2):
        m = rho
        for j, o in enumerate(rec):
            m = apply_operator(m, np.outer(kets[o], kets[o].conj()), [j + 2])
        pair = partial_trace(m, [0, 1])
        p = float(np.real(np.trace(pair)))
        if sum(rec) % 2:
            pair = apply_operator(pair, Z, [0])
        branches.append(Branch(tuple(rec), p, DensityMatrix(pair / p)))
    return branches


def prepare_pair_oracle(n: int, q: float, cap: int = DEFAULT_CAP, tol: float = 1e-12) -> DensityMatrix:
    """Dealer-partner pair after the other parties measure; all branches must coincide."""
    branches = prepare_pair_branches(n, q, cap=cap)
    ref = branches[0].state.data
    spread = max(float(np.max(np.abs(b.state.data - ref))) for b in branches)
    if spread > tol:
        raise AssertionError(f"measurement branches differ by {spread:.3g}")
    return DensityMatrix(ref)


class BBPSSWOracleResult(NamedTuple):
    fidelity_next: float
    p_success: float


def _bbpssw_rotated(q: float) -> np.ndarray:
    # qubits: 0 dealer pair1, 1 partner pair1, 2 dealer pair2, 3 partner pair2
    pair = isotropic_pair(q).data
    rho = np.kron(pair, pair)
    rho = apply_operator(rho, CNOT, [0, 2])
    rho = apply_operator(rho, CNOT, [1, 3])
    return rho


def bbpssw_outcome_table(q: float) -> np.ndarray:
    """Joint probabilities of the (dealer, partner) target outcomes."""
    rho = _bbpssw_rotated(q)
    probs = np.real(np.diag(partial_trace(rho, [2, 3]))).reshape(2, 2)
    return probs


def bbpssw_branch(q: float, dealer: int = 0, partner: int = 0) -> Tuple[float, DensityMatrix]:
    """Probability and normalized kept pair for one target outcome."""
    if not 0.0 <= q <= 1.0:
        raise DomainError("q must lie in [0, 1]")
    rho = _bbpssw_rotated(q)
    proj = [P0, X @ P0 @ X]
    rho = apply_operator(rho, proj[dealer], [2])
    rho = apply_operator(rho, proj[partner], [3])
    kept = partial_trace(rho, [0, 1])
    p = float(np.real(np.trace(kept)))
    return p, DensityMatrix(kept / p)


def bbpssw_step_oracle(q: float) -> BBPSSWOracleResult:
    """Two isotropic pairs, bilateral CNOT, keep only the (0, 0) outcome."""
    p, kept = bbpssw_branch(q, 0, 0)
    return BBPSSWOracleResult(fidelity(kept, bell_states()["phi+"]), p)


def depolarize(rho: np.ndarray, qubit: int, q: float) -> np.ndarray:
    """q rho + (1-q) (Pauli twirl of ``qubit``)."""
    w0 = q + (1.0 - q) / 4.0
    out = w0 * rho
    for p in (X, Y, Z):
        out = out + (1.0 - q) / 4.0 * apply_operator(rho, p, [qubit])
    return out


def teleport_channel_state(n: int, q: float, cap: int = DEFAULT_CAP) -> DensityMatrix:
    """Local GHZ with qubits 1..n-1 sent through the isotropic-pair teleportation channel."""
    _check_cap(n, cap)
    rho = ghz_state(n).projector().data
    for j in range(1, n):
        rho = depolarize(rho, j, q)
    return DensityMatrix(rho)


def teleport_qubit(rho: np.ndarray, qubit: int, pair: np.ndarray) -> np.ndarray:
    """Teleport ``qubit`` of ``rho`` through ``pair`` with a Bell measurement and Pauli fix.

    All four outcomes are summed after correction; the receiver's qubit
    takes the place of the teleported one.
    """
    n = rho.shape[0].bit_length() - 1
    full = np.kron(rho, pair)  # sender half at n, receiver half at n + 1
    out = np.zeros((2 ** (n + 2), 2 ** (n + 2)), dtype=complex)
    for name, bell in bell_states().items():
        m = apply_operator(full, bell.projector().data, [qubit, n])
        m = apply_operator(m, BELL_CORRECTIONS[name], [n + 1])
        out += m
    keep = [i for i in range(n) if i != qubit] + [n + 1]
    reduced = partial_trace(out, keep)
    # put the receiver qubit back at position ``qubit``
    order = list(range(n - 1))
    order.insert(qubit, n - 1)
    return permute_qubits(reduced, order)


def teleport_explicit_state(n: int, q: float, cap: int = DEFAULT_CAP) -> DensityMatrix:
    """Sequential Bell-measurement teleportation of qubits 1..n-1 of a local GHZ."""
    _check_cap(n + 2, cap)
    rho = ghz_state(n).projector().data
    pair = isotropic_pair(q).data
    for j in range(1, n):
        rho = teleport_qubit(rho, j, pair)
    return DensityMatrix(rho)


def teleport_oracle(n: int, q: float, cap: int = DEFAULT_CAP) -> float:
    """GHZ fidelity after teleporting n-1 qubits through pairs of weight q (channel form)."""
    return fidelity(teleport_channel_state(n, q, cap=cap), ghz_state(n))


def teleport_channel_error(n: int, q: float, cap: int = DEFAULT_CAP) -> float:
    """Max-norm distance between explicit teleportation and the channel form."""
    a = teleport_explicit_state(n, q, cap=cap).data
    b = teleport_channel_state(n, q, cap=cap).data
    return float(np.max(np.abs(a - b)))


def verify_bipartite(tol: float = 1e-10, n_values: Iterable[int] = (3, 4, 5), cap: int = DEFAULT_CAP) -> VerificationReport:
    """Preparation, distillation and teleportation against the closed forms."""
    from .bipartite import bbpssw_step, teleport_fidelity

    rep = VerificationReport()
    qgrid = np.linspace(0.0, 1.0, 21)
    f_err = p_err = d_err = 0.0
    for q in qgrid:
        res = bbpssw_step_oracle(float(q))
        step = bbpssw_step(float(q), model="exact")
        f_err = max(f_err, abs(res.fidelity_next - (1.0 + 3.0 * step.q_next) / 4.0))
        p_err = max(p_err, abs(res.p_success - step.p_success))
        d_err = max(d_err, abs(bbpssw_outcome_table(float(q))[0].sum() - 0.5))
    rep.add("bbpssw fidelity (1 + 3 q_next)/4", f_err, tol)
    rep.add("bbpssw success probability (1 + q^2)/4", p_err, tol)
    rep.add("bbpssw dealer marginal 1/2", d_err, tol)

    for n in n_values:
        if n > cap:
            continue
        worst = 0.0
        for q in (0.0, 0.3, 0.7, 1.0):
            for b in prepare_pair_branches(n, q, cap=cap):
                worst = max(worst, float(np.max(np.abs(b.state.data - isotropic_pair(q).data))))
        rep.add(f"n={n} prepared pair is isotropic in every branch", worst, tol)

    for n in (2, 3, 4):
        worst = 0.0
        for q in (0.0, 0.5, 0.9, 1.0):
            worst = max(worst, abs(teleport_oracle(n, q, cap=cap) - teleport_fidelity(q, n)))
        rep.add(f"n={n} teleported GHZ fidelity", worst, tol)
    for n in (2, 3):
        worst = max(teleport_channel_error(n, q, cap=cap) for q in (0.0, 0.5, 0.9, 1.0))
        rep.add(f"n={n} teleportation equals depolarizing channel", worst, tol)
    return rep
