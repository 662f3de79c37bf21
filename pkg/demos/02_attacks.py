"""Attack gallery: Monte-Carlo strategies against the real token, plus the
two statevector attacks that show why the design assumptions are tight.

Rates bracket the cheating-probability SDP: every implemented strategy is a
lower bound, the SDP optimum (demo 04) is the upper bound over all of them.
"""

from qotm.adversary import (
    bounded_key_attack,
    breidbart_attack,
    breidbart_rate,
    exhaust_attack_n1,
    make_toy_ma,
    naive_reuse_attack,
    naive_reuse_rate,
    rewind_attack,
)
from qotm.protocol import make_rng

rng = make_rng(7)
TRIALS = 50000

print("two-query strategies against the real token (rate vs analytic):")
for n in (1, 2, 4, 8):
    naive = naive_reuse_attack(n, 0, 1, TRIALS, rng)
    breid = breidbart_attack(n, 0, 1, TRIALS, rng)
    print(
        f"  n={n}:  measure-and-reuse {naive.rate:.4f} ~ {naive_reuse_rate(n):.4f}"
        f"   intermediate-basis {breid.rate:.4f} ~ {breidbart_rate(n):.4f}"
    )

print("\nthree queries break one key qubit outright:")
ex = exhaust_attack_n1(0, 1, 10000, rng)
print(f"  measure Z + honest 0-query + both diagonal keys: rate {ex.rate}")

print("\nmeasure-and-access memory with few keys per bit (Delta keys each):")
for n, delta in ((3, 2), (4, 4)):
    inst = make_toy_ma(n, delta, delta, 0, 1, rng)
    stats = bounded_key_attack(inst, TRIALS, rng)
    print(
        f"  n={n}, Delta={delta}: measure, rewind, re-extract -> "
        f"rate {stats.rate:.4f} >= 1/Delta^2 = {1 / delta**2:.4f}"
    )

print("\nreversible superposition queries lose everything, deterministically:")
wins = 0
for _ in range(100):
    s0, s1 = int(rng.integers(2)), int(rng.integers(2))
    inst = make_toy_ma(3, 2, 2, s0, s1, rng)
    got0, got1, fidelity = rewind_attack(inst, rng)
    wins += (got0, got1) == (s0, s1) and fidelity > 1 - 1e-10
print(f"  coherent copy + unitary rewind: both bits on {wins}/100 instances")
