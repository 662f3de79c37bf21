"""Exact combinatorics behind the security analysis.

Everything here is integer/rational arithmetic: the success-string count |T|,
the consistency-relation count |R| (closed form vs brute force), the exact
dual value beta = |R| / (4^n d^m), and the closed-form feasibility bound.
"""

from qotm import security_sdp as gw

print("success strings |T| = 4^m - 2*3^m + 2^m:")
for m in range(1, 9):
    print(f"  m={m}: {gw.cardinality_T(m):>8d}")

print("\nconsistent triples |R|, closed form vs exhaustive enumeration:")
for n in (1, 2, 3):
    for m in (1, 2, 3):
        closed = gw.count_R_closed(n, m)
        brute = gw.count_R_brute(n, m)
        mark = "ok" if closed == brute else "MISMATCH"
        print(f"  n={n} m={m}: closed {closed:>8d}  brute {brute:>8d}  {mark}")

print("\nexact dual values beta (lower bounds on the cheating probability):")
for n, m in ((1, 2), (1, 3), (2, 2), (2, 3)):
    beta = gw.beta_exact(n, m)
    print(f"  n={n} m={m}: beta = {beta} = {float(beta):.6f}")

print("\nlarge keys, exact rationals (no enumeration, no rounding):")
for m in (1, 2, 5, 10):
    beta = gw.beta_exact(40, m)
    heur = gw.heuristic_bound(40, m)
    print(
        f"  n=40 m={m:>2d}: beta = {float(beta):.3e}   "
        f"heuristic m/2^(n/2) = {heur:.3e}   ratio {float(beta) / heur:.3e}"
    )

print("\n|R| for n=50, m=10 stays exact (arbitrary precision):")
big = gw.count_R_closed(50, 10)
print(f"  {big}")
print(f"  ({len(str(big))} digits)")

print("\nclosed-form feasible bound p = |T| 2^(1-n) (1+1/sqrt2)^n:")
for n in (1, 3, 20, 40):
    for m in (2, 3):
        print(f"  n={n:>2d} m={m}: p = {gw.linear_bound_p(n, m):.3e}")
print("(values above 1 are vacuous; the bound bites once m < 0.114 n)")
