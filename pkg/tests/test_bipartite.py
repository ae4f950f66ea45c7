from math import comb

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from ghzpurify import oracle
from ghzpurify.bipartite import (
    bbpssw_step,
    closed_form_rounds,
    plan_bipartite,
    reduce_to_pair,
    step_success_probability,
    teleport_fidelity,
)
from ghzpurify.errors import CapExceededError, DomainError, UnreachableTargetError
from ghzpurify.states import q_from_delta


def teleport_fidelity_by_subsets(q, n):
    """Sum over which j of the n-1 links failed; each failed subset contributes 2^-(j+1)."""
    m = n - 1
    total = q**m
    for j in range(1, m + 1):
        total += (1 - q) ** j * q ** (m - j) * comb(m, j) * 2.0 ** (-j - 1)
    return total


# --- preparation -----------------------------------------------------------


@pytest.mark.parametrize("n,q", [(5, 0.7), (3, 1.0), (4, 0.3)])
def test_reduce_to_pair(n, q):
    assert reduce_to_pair(n, q).q == q


def test_reduce_matches_oracle():
    pair = oracle.prepare_pair_oracle(4, 0.3)
    ref = oracle.isotropic_pair(reduce_to_pair(4, 0.3).q)
    assert np.max(np.abs(pair.data - ref.data)) <= 1e-12


def test_reduce_needs_three_parties():
    with pytest.raises(DomainError):
        reduce_to_pair(2, 0.5)


# --- one distillation round ---------------------------------------------------


def test_step_examples():
    s = bbpssw_step(1.0)
    assert (s.q_next, s.p_success, s.cost_factor) == (1.0, 0.5, 4.0)
    assert bbpssw_step(1 / 3).q_next == pytest.approx(1 / 3, abs=1e-15)
    s = bbpssw_step(0.8)
    assert s.q_next == pytest.approx(4.16 / 4.92, abs=1e-15)
    assert s.p_success == pytest.approx(0.45, abs=1e-15)
    assert s.cost_factor == pytest.approx(8 / 1.8, abs=1e-14)


def test_fixed_points_from_symbolic_solve():
    x = sp.symbols("x")
    roots = sorted(sp.solve(sp.Eq((4 * x**2 + 2 * x) / (3 * (x**2 + 1)), x), x))
    assert roots == [0, sp.Rational(1, 3), 1]
    for r in roots:
        assert bbpssw_step(float(r)).q_next == pytest.approx(float(r), abs=1e-15)


@given(st.floats(0.0, 1.0))
def test_step_direction(q):
    nxt = bbpssw_step(q).q_next
    if 1 / 3 + 1e-9 < q < 1 - 1e-9:
        assert nxt > q
    elif 1e-9 < q < 1 / 3 - 1e-9:
        assert nxt < q


@given(st.floats(0.0, 1.0))
def test_step_probability_ranges(q):
    s = bbpssw_step(q)
    assert 0.25 <= s.p_success <= 0.5
    assert 4.0 <= s.cost_factor <= 8.0
    assert s.cost_factor == pytest.approx(8 / (1 + q))


def test_step_domain():
    for q in (-0.01, 1.01):
        with pytest.raises(DomainError):
            bbpssw_step(q)
    with pytest.raises(DomainError):
        step_success_probability(0.5, model="nope")


def test_exact_success_matches_oracle():
    for q in np.linspace(0, 1, 11):
        q = float(q)
        assert step_success_probability(q, "exact") == pytest.approx(oracle.bbpssw_step_oracle(q).p_success, abs=1e-12)


def test_keep_both_branch_has_same_fidelity():
    # the symmetric rule is only a valid option if (1,1) yields the same pair as (0,0)
    for q in (0.2, 0.5, 0.9):
        p00, s00 = oracle.bbpssw_branch(q, 0, 0)
        p11, s11 = oracle.bbpssw_branch(q, 1, 1)
        assert p00 == pytest.approx(p11, abs=1e-14)
        assert np.max(np.abs(s00.data - s11.data)) <= 1e-12
        assert step_success_probability(q, "exact", keep_both=True) == pytest.approx(p00 + p11, abs=1e-12)


def test_small_error_contraction():
    for d in np.geomspace(1e-12, 1e-3, 60):
        q = 1.0 - d
        nxt = bbpssw_step(q)
        d_actual = 1.0 - q
        assert abs(nxt.delta_next - 2 / 3 * d_actual) <= 2 * d_actual**2


def test_delta_form_agrees_with_rational_form():
    for q in np.linspace(0.9, 1 - 1e-12, 400):
        q = float(q)
        rational = (4 * q * q + 2 * q) / (3 * (q * q + 1))
        assert bbpssw_step(q).q_next == pytest.approx(rational, rel=1e-15, abs=0)


def test_closed_form_trajectory():
    for d0 in (1e-3, 3e-4, 1e-5):
        q = 1.0 - d0
        d_true = 1.0 - q
        for k in range(1, 21):
            q = bbpssw_step(q).q_next
            assert abs(q - (1 - (2 / 3) ** k * d_true)) <= 10 * k * d_true**2


def test_convergence_to_one():
    q = 0.34
    for _ in range(400):
        prev, q = q, bbpssw_step(q).q_next
        assert q >= prev
    assert q == pytest.approx(1.0, abs=1e-12)


# --- teleportation ------------------------------------------------------------


def test_teleport_examples():
    for n in (2, 3, 9):
        assert teleport_fidelity(1.0, n) == 1.0
    assert teleport_fidelity(0.0, 3) == pytest.approx(0.125, abs=1e-15)
    assert teleport_fidelity(0.9, 3) == pytest.approx(0.85625, abs=1e-15)


@pytest.mark.parametrize("n", [2, 3, 4, 7, 20])
def test_teleport_closed_form_equals_subset_sum(n):
    for q in np.linspace(0, 1, 17):
        assert teleport_fidelity(float(q), n) == pytest.approx(teleport_fidelity_by_subsets(float(q), n), abs=1e-14)


def test_teleport_matches_oracle():
    for n in (2, 3, 4):
        for q in (0.0, 0.5, 0.9, 1.0):
            assert teleport_fidelity(q, n) == pytest.approx(oracle.teleport_oracle(n, q), abs=1e-12)


def test_teleport_monotone():
    qs = np.linspace(0, 1, 50)
    for n in (2, 3, 6, 15):
        f = [teleport_fidelity(float(q), n) for q in qs]
        assert all(b > a for a, b in zip(f, f[1:]))
    for q in (0.1, 0.5, 0.95):
        f = [teleport_fidelity(q, n) for n in range(2, 30)]
        assert all(b < a for a, b in zip(f, f[1:]))


# --- planning -----------------------------------------------------------------


def test_plan_already_sufficient():
    p = plan_bipartite(3, 1.0, 0.01)
    assert (p.k, p.expected_cost, p.final_fidelity) == (0, 2.0, 1.0)
    assert p.closed_form_k is None


def test_plan_unreachable():
    with pytest.raises(UnreachableTargetError) as exc:
        plan_bipartite(3, 0.2, 0.01)
    assert exc.value.best_fidelity == pytest.approx(0.5 * (0.2**2 + 0.6**2), abs=1e-15)


def test_plan_cap():
    with pytest.raises(CapExceededError):
        plan_bipartite(10, 0.8, 0.01, k_max=3)


def test_plan_domain():
    with pytest.raises(DomainError):
        plan_bipartite(3, 0.9, 0.0)
    with pytest.raises(DomainError):
        plan_bipartite(3, 0.9, 0.1, k_max=-1)


def test_plan_delta_02_point():
    q0 = q_from_delta(10, 0.2)
    p = plan_bipartite(10, q0, 0.01)
    # reference: iterate the recurrence by hand
    q, k, cost = q0, 0, 9.0
    while teleport_fidelity(q, 10) < 0.99:
        cost *= 8 / (1 + q)
        q = (4 * q * q + 2 * q) / (3 * (q * q + 1))
        k += 1
    assert p.k == k == 14
    assert p.expected_cost == pytest.approx(cost, rel=1e-12)
    assert teleport_fidelity(p.trajectory[-2], 10) < 0.99 <= p.final_fidelity
    assert p.closed_form_k is not None


@given(st.integers(2, 20), st.floats(0.34, 1.0), st.floats(1e-6, 0.5))
def test_plan_invariants(n, q0, eps):
    try:
        p = plan_bipartite(n, q0, eps)
    except CapExceededError:
        return
    assert p.final_fidelity >= 1 - eps
    assert p.expected_cost >= p.lower_bound_cost * (1 - 1e-12)
    assert all(b >= a for a, b in zip(p.trajectory, p.trajectory[1:]))
    assert len(p.trajectory) == p.k + 1


def test_lower_bound_tight_only_at_one():
    p = plan_bipartite(5, 0.9, 1e-4)
    assert p.k > 0 and p.expected_cost > p.lower_bound_cost


def test_closed_form_rounds_overshoots():
    # the estimate is built on F ~ 1 - (n-1) Delta, twice the true first-order loss
    for n in (3, 5, 10):
        for d in (1e-3, 1e-4):
            for eps in (d / 10, d / 100):
                q0 = q_from_delta(n, d)
                p = plan_bipartite(n, q0, eps)
                assert 1 <= closed_form_rounds(n, q0, eps) - p.k <= 2


def test_accounting_variants():
    q0 = q_from_delta(6, 0.1)
    nominal = plan_bipartite(6, q0, 1e-3)
    exact = plan_bipartite(6, q0, 1e-3, success_model="exact")
    both = plan_bipartite(6, q0, 1e-3, keep_both=True)
    assert nominal.k == exact.k == both.k
    assert exact.expected_cost > nominal.expected_cost
    assert both.expected_cost == pytest.approx(nominal.expected_cost / 2**nominal.k, rel=1e-12)
