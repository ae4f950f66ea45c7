from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from ghzpurify import oracle
from ghzpurify.errors import BelowThresholdError, CapExceededError, DomainError, UnreachableTargetError
from ghzpurify.multipartite import (
    distillability_threshold,
    fidelity_crossover,
    fidelity_upper_bound,
    lambda_step,
    peak_fidelity,
    plan_multipartite,
    run_rounds,
    success_probability,
    success_probability_white,
    threshold_closed_form,
)
from ghzpurify.states import IterationState, fidelity_ghz, input_state, q_from_delta


def round_by_pair_table(n, q, r, s):
    """Expand (qG + r 1/D + s d) x (same) term by term with exact fractions.

    Images of the ordered pairs (G, 1 unnormalized, d) as (G, 1, d) coefficients.
    """
    D = Fraction(2) ** n
    half = Fraction(1, 2)
    table = {
        ("G", "G"): (half, 0, 0),
        ("1", "1"): (0, 1, 0),
        ("G", "1"): (0, 0, 1),
        ("1", "G"): (0, 0, 1),
        ("1", "d"): (0, 0, 1),
        ("d", "1"): (0, 0, 1),
        ("G", "d"): (0, 0, half),
        ("d", "G"): (0, 0, half),
        ("d", "d"): (0, 0, half),
    }
    w = {"G": Fraction(q), "1": Fraction(r) / D, "d": Fraction(s)}
    out = [Fraction(0)] * 3
    for (a, b), img in table.items():
        for i in range(3):
            out[i] += w[a] * w[b] * img[i]
    # identity coefficient -> weight on 1/D
    return float(out[0]), float(out[1] * D), float(out[2])


def test_lambda_step_examples():
    a = lambda_step(IterationState(3, 1.0, 0.0, 0.0))
    assert (a.q, a.r, a.s) == (0.5, 0.0, 0.0)
    b = lambda_step(IterationState(3, 0.0, 1.0, 0.0))
    assert (b.q, b.r, b.s) == (0.0, 1 / 8, 0.0)
    c = lambda_step(IterationState(3, 0.6, 0.4, 0.0))
    assert (c.q, c.r, c.s) == pytest.approx((0.18, 0.02, 0.06), abs=1e-15)


def test_lambda_step_matches_oracle_at_n3():
    out, tr = oracle.lambda_oracle(oracle.build_state(3, 0.6, 0.4, 0.0))
    (q, r, s), res = oracle.extract_weights(out)
    assert res <= 1e-12
    assert (q, r, s) == pytest.approx((0.18, 0.02, 0.06), abs=1e-12)
    assert tr == pytest.approx(0.26, abs=1e-12)


@settings(max_examples=200)
@given(st.integers(2, 30), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_lambda_step_matches_pair_table(n, q, r, s):
    ref = round_by_pair_table(n, q, r, s)
    out = lambda_step(IterationState(n, q, r, s))
    assert (out.q, out.r, out.s) == pytest.approx(ref, rel=1e-12, abs=1e-300)


def test_printed_recurrence_differs_only_with_diag_weight():
    for n in (3, 6):
        a = lambda_step(IterationState(n, 0.7, 0.3, 0.0), "printed")
        b = lambda_step(IterationState(n, 0.7, 0.3, 0.0), "exact")
        assert (a.q, a.r, a.s) == (b.q, b.r, b.s)
        a = lambda_step(IterationState(n, 0.5, 0.3, 0.2), "printed")
        b = lambda_step(IterationState(n, 0.5, 0.3, 0.2), "exact")
        # missing halves of the GHZ x diag and 1 x diag cross terms
        assert b.s - a.s == pytest.approx(0.5 * 0.2 * 0.5 + 0.2 * 0.3 / 2**n, abs=1e-15)
    with pytest.raises(DomainError):
        lambda_step(IterationState(3, 0.5, 0.5, 0.0), "other")


def test_success_probability_examples():
    assert success_probability(input_state(3, 1.0)) == 0.5
    assert success_probability(input_state(3, 0.0)) == pytest.approx(1 / 8, abs=1e-15)
    assert success_probability(input_state(3, 0.6)) == pytest.approx(0.26, abs=1e-15)


def test_success_probability_white_closed_form():
    for n in (2, 3, 5, 12):
        for q in np.linspace(0, 1, 11):
            q = float(q)
            assert success_probability(input_state(n, q)) == pytest.approx(success_probability_white(n, q), abs=1e-15)


def test_success_probability_needs_normalized():
    with pytest.raises(DomainError):
        success_probability(IterationState(3, 0.3, 0.1, 0.0))


@given(st.integers(2, 20), st.floats(0.01, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0.05, 1))
def test_trace_law(n, q, r, s, t):
    state = IterationState(n, q, r, s)
    state = state.scaled(t / state.trace)
    p = success_probability(state.normalize())
    assert lambda_step(state).trace == pytest.approx(state.trace**2 * p, rel=1e-12)


def test_pure_ghz_trajectory():
    traj = run_rounds(6, 1.0, 4)
    assert [s.q for s in traj.states] == [1.0, 0.5, 0.125, 2.0**-7, 2.0**-15]
    assert all(s.r == 0 and s.s == 0 for s in traj.states)
    assert traj.fidelities == [1.0] * 5


def test_trajectory_trace_recursion():
    traj = run_rounds(5, 0.6, 6)
    for i in range(1, traj.k + 1):
        t_prev, t = traj.states[i - 1].trace, traj.states[i].trace
        assert t == pytest.approx(t_prev**2 * traj.success_probs[i - 1], rel=1e-12)


def test_one_round_costs():
    for n, q0 in ((6, 0.8), (10, 0.5), (20, 0.3)):
        plan = plan_multipartite(n, q0, 1 - fidelity_ghz(lambda_step(input_state(n, q0))) + 1e-12)
        assert plan.k == 1
        p1 = success_probability_white(n, q0)
        assert plan.cost_paper == pytest.approx(1 / p1, rel=1e-14)
        assert plan.cost_expected == pytest.approx(2 / p1, rel=1e-14)


def test_cost_metrics_relation():
    # cost_expected / cost_paper = 2^k * prod P_i^(2^(k-i) - 1): not ordered in general
    plan = plan_multipartite(10, q_from_delta(10, 0.65), 0.01)
    traj = plan.trajectory
    ratio = 2.0**plan.k
    for i, p in enumerate(traj.success_probs, start=1):
        ratio *= p ** (2 ** (plan.k - i) - 1)
    assert plan.cost_expected / plan.cost_paper == pytest.approx(ratio, rel=1e-12)


def test_plan_examples():
    p = plan_multipartite(10, 1.0, 0.01)
    assert (p.k, p.cost_paper, p.cost_expected) == (0, 1.0, 1.0)

    q0 = q_from_delta(10, 0.5)
    p = plan_multipartite(10, q0, 0.01)
    # one round from white noise, evaluated by the pair table
    q1, r1, s1 = round_by_pair_table(10, q0, 1 - q0, 0.0)
    f1 = (q1 + r1 / 1024 + s1 / 2) / (q1 + r1 + s1)
    assert f1 >= 0.99
    assert p.k == 1 and p.final_fidelity == pytest.approx(f1, abs=1e-15)

    with pytest.raises(BelowThresholdError):
        plan_multipartite(4, 0.1, 0.01)


def test_plan_unreachable_above_threshold():
    # n = 3, delta = 0.2: fidelity peaks near 0.92 then decays towards 1/2
    q0 = q_from_delta(3, 0.2)
    assert q0 > threshold_closed_form(3)
    with pytest.raises(UnreachableTargetError) as exc:
        plan_multipartite(3, q0, 0.01)
    assert not isinstance(exc.value, BelowThresholdError)
    k, best = peak_fidelity(3, q0)
    assert exc.value.best_fidelity == pytest.approx(best)
    assert 0.9 < best < 0.93


def test_plan_cap_and_domain():
    with pytest.raises(CapExceededError):
        plan_multipartite(10, 0.5, 0.001, k_max=0)
    with pytest.raises(DomainError):
        plan_multipartite(10, 0.5, 1.5)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 14), st.floats(0.0, 1.0))
def test_fidelity_bound_holds_for_later_rounds(n, q0):
    traj = run_rounds(n, q0, 12, renormalize=True)
    for i, state in enumerate(traj.states):
        assert max(traj.fidelities[i:]) <= fidelity_upper_bound(state) + 1e-12


def test_long_run_drifts_to_diag_state():
    # no rotations between rounds: the classically correlated component takes over
    for n, q0 in ((3, 0.9), (4, 0.5), (6, 0.2)):
        traj = run_rounds(n, q0, 14, renormalize=True)
        assert traj.fidelities[-1] == pytest.approx(0.5, abs=2e-3)
        assert max(traj.fidelities) > traj.fidelities[-1]


@pytest.mark.parametrize("n,expected", [(3, 1 / 3), (4, 2 / 14), (10, 2 / 1022)])
def test_threshold_examples(n, expected):
    closed, numeric = distillability_threshold(n)
    assert closed == pytest.approx(expected, abs=1e-15)
    assert abs(numeric - closed) <= 1e-9


def test_threshold_n2_and_domain():
    assert distillability_threshold(2) == (1.0, 1.0)
    with pytest.raises(DomainError):
        distillability_threshold(1)
    with pytest.raises(DomainError):
        distillability_threshold(3, tol=0.0)


def test_threshold_is_where_normalized_ghz_weight_stops_growing():
    for n in (3, 5, 8):
        thr = threshold_closed_form(n)
        for q0, grows in ((thr * 1.001, True), (thr * 0.999, False)):
            nxt = lambda_step(input_state(n, q0)).normalize()
            assert (nxt.q > q0) is grows


def test_fidelity_crossover_symbolic():
    x = sp.symbols("x", positive=True)
    for n in (2, 3, 4, 6):
        D = 2**n
        r = 1 - x
        qn, rn, sn = x**2 / 2, r**2 / D, 2 * x * r / D
        gain = (qn + rn / D + sn / 2) / (qn + rn + sn) - (x + r / D)
        roots = [float(v) for v in sp.solve(sp.numer(sp.together(gain)), x) if v != 1]
        assert len(roots) == 1
        assert fidelity_crossover(n) == pytest.approx(roots[0], rel=1e-10)
        assert roots[0] == pytest.approx(1 / ((2 ** (n - 1) - 1) * (2**n - 1)), rel=1e-12)


def test_fidelity_bound_subnormal_weight():
    st = IterationState(11, 1e-315, 1.8e-4, 1.0 - 1.8e-4, normalized=True)
    assert fidelity_upper_bound(st) == pytest.approx(0.5, abs=1e-12)
    assert fidelity_upper_bound(IterationState(4, 0.0, 1.0, 0.0)) == 2.0**-4
