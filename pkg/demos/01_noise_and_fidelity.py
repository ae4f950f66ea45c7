# White-noise GHZ states: weight q versus in-fidelity delta.
#
# A noisy GHZ state is q|GHZ><GHZ| + (1-q) 1/2^n.  Its fidelity with the
# pure GHZ state is q + (1-q)/2^n, so the same delta corresponds to a
# smaller q as n grows.

from ghzpurify.states import NoiseSpec, convert_noise, fidelity_ghz, input_state

print("delta = 0.2 expressed as a GHZ weight")
for n in (3, 4, 6, 10, 20):
    spec = convert_noise(NoiseSpec(n, delta=0.2))
    print(f"  n={n:2d}  q={spec.q:.6f}")

# q = 0 is the maximally mixed state; delta tends to 1 - 2^-n
print()
print("largest delta white noise can produce:")
for n in (3, 10):
    print(f"  n={n:2d}  {convert_noise(NoiseSpec(n, q=0.0)).delta}")

# The family also carries a 'diag' component (|0..0><0..0| + |1..1><1..1|)/2,
# which has GHZ fidelity 1/2 for any n.  It appears after the first
# multipartite round.
st = input_state(5, 0.7)
print()
print("input state n=5, q=0.7:", st, "fidelity", fidelity_ghz(st))
