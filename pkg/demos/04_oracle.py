# Brute-force checks with dense density matrices.
#
# Everything below builds explicit 2^k x 2^k matrices; nothing is taken
# from the closed forms except the values being compared against.

import numpy as np

from ghzpurify import oracle
from ghzpurify.multipartite import lambda_step
from ghzpurify.states import IterationState

for n in (2, 3, 4):
    rep = oracle.verify_lambda_identities(n, 1e-10, samples=20)
    print(f"n={n}: {sum(c.passed for c in rep.checks)}/{len(rep.checks)} checks pass")

# one round on a mixed family member, by hand
rho = oracle.build_state(3, 0.5, 0.3, 0.2)
out, tr = oracle.lambda_oracle(rho)
(q, r, s), residual = oracle.extract_weights(out)
ref = lambda_step(IterationState(3, 0.5, 0.3, 0.2))
print("\noracle weights ", np.round([q, r, s], 12), "residual", residual)
print("recurrence     ", np.round([ref.q, ref.r, ref.s], 12))
alt = lambda_step(IterationState(3, 0.5, 0.3, 0.2), "printed")
print("printed variant", np.round([alt.q, alt.r, alt.s], 12))

# two-pair recurrence step
print("\nq     F_next (oracle)  p(0,0) oracle  (1+q)/4")
for q in (0.4, 0.6, 0.8, 1.0):
    res = oracle.bbpssw_step_oracle(q)
    print(f"{q:.1f}   {res.fidelity_next:.10f}     {res.p_success:.6f}       {(1 + q) / 4:.6f}")

# teleportation: explicit Bell measurement vs depolarizing channel
for n in (2, 3):
    print(f"\nn={n} explicit vs channel teleportation: max diff",
          max(oracle.teleport_channel_error(n, q) for q in (0.0, 0.5, 0.9)))
