"""Distill-then-teleport, step by step.

1. Everybody but the dealer and one partner measures in the X basis; the
   partner link is left with an isotropic pair of the same weight q.
2. The dealer and partner run recurrence rounds q -> (4q^2+2q)/(3(q^2+1)).
3. N-1 qubits of a local GHZ are teleported through the distilled pairs.
"""
from ghzpurify import oracle
from ghzpurify.bipartite import bbpssw_step, plan_bipartite, teleport_fidelity
from ghzpurify.states import q_from_delta

n, delta, eps = 10, 0.2, 0.01
q0 = q_from_delta(n, delta)

pair = oracle.prepare_pair_oracle(4, 0.3)
print("prepared pair (n=4, q=0.3) equals the isotropic pair:",
      abs(pair.data - oracle.isotropic_pair(0.3).data).max() < 1e-12)

print("\nround  q            teleported F   cost factor")
q = q0
for k in range(6):
    s = bbpssw_step(q)
    print(f"{k:5d}  {q:.9f}  {teleport_fidelity(q, n):.9f}   {s.cost_factor:.4f}")
    q = s.q_next

plan = plan_bipartite(n, q0, eps)
print(f"\nn={n}, delta={delta}, eps={eps}")
print(f"  rounds needed         {plan.k}")
print(f"  expected N-party cost {plan.expected_cost:.4g}")
print(f"  4^k (N-1) lower bound {plan.lower_bound_cost:.4g}")
print(f"  small-error estimate  k={plan.closed_form_k}, cost {plan.closed_form_cost:.4g}")
print(f"  4 N^4.42 (d/e)^3.42   {plan.asymptotic_cost:.4g}")

# The success probability the cost model uses, (1+q)/4, is larger than what
# a dense simulation of the two-pair circuit gives, (1+q^2)/4.
exact = plan_bipartite(n, q0, eps, success_model="exact")
print(f"  with simulated success probabilities: {exact.expected_cost:.4g}")

# Below q = 1/3 recurrence makes the pairs worse.
try:
    plan_bipartite(3, 0.2, eps)
except Exception as exc:
    print("\nq0=0.2:", type(exc).__name__, "-", exc)
