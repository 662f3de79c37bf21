"""End-to-end reproduction of the cheating-probability SDP numbers.

Builds the success operator from token simulation, verifies the closed-form
feasible solutions and the exact dual point, then solves the streamlined
primal for two key/query sizes.  Expected optima: ~0.8536 at (n=1, m=2) and
~1.0 at (n=1, m=3); the exact dual values 1/4 and 15/32 sit below them.

The (1, 3) solve takes a few minutes (2048-dimensional constraint); pass
--skip-m3 to leave it out.
"""

import sys
import time

from qotm import security_sdp as gw, solver as sdp
from qotm.adversary import breidbart_attack, breidbart_rate
from qotm.protocol import make_rng

print("building the success operator from token simulation:")
q = gw.build_Q1(1, 2)
print(f"  (n=1, m=2): {len(q.blocks)} classical blocks, trace {q.trace():.3f}")
print(f"  top block eigenvalue {gw.lambda_max_numeric(q):.6f} "
      f"(closed-form bound {gw.lambda_max_formula(1):.6f} carries a 2x margin)")

print("\nclosed-form feasible solutions:")
chain = gw.trivial_feasible(1, 2)
rep = gw.verify_primal_chain(chain, q)
print(f"  success-filter-free chain: p = 1, residuals pass = {rep.passed}")
chain2, p = gw.linear_bound_feasible(1, 2)
rep2 = gw.verify_primal_chain(chain2, q)
print(f"  block-uniform chain: p = {p:.4f} (vacuous at n=1), pass = {rep2.passed}")

ys, beta = gw.dual_uniform(1, 2)
drep = gw.verify_dual(ys, q)
print(f"  uniform dual point: beta = {beta} exactly, feasible = {drep.passed}")

print("\nsolving the streamlined primal, (n=1, m=2), tol 1e-6:")
inst = gw.build_primal_instance(1, 2)
t0 = time.time()
sol = sdp.solve(inst, sdp.SolveOptions(tol=1e-6))
cert = sdp.verify_certificate(inst, sol, tol=1e-5)
print(f"  optimum {sol.objective:.4f} ({sol.status}, {sol.iterations} iterations, "
      f"{time.time() - t0:.1f}s; certificate pass = {cert.passed})")

stats = breidbart_attack(1, 0, 1, 50000, make_rng(4))
print(f"  sandwich: beta {float(beta):.4f} <= optimum {sol.objective:.4f} and "
      f"breidbart {stats.rate:.4f} (~{breidbart_rate(1):.4f}) <= optimum")

if "--skip-m3" not in sys.argv:
    print("\nsolving (n=1, m=3), tol 1e-4 (a few minutes)...")
    inst3 = gw.build_primal_instance(1, 3)
    t0 = time.time()
    sol3 = sdp.solve(inst3, sdp.SolveOptions(tol=1e-4))
    print(f"  optimum {sol3.objective:.4f} ({sol3.status}, {sol3.iterations} "
          f"iterations, {time.time() - t0:.0f}s)")
    print(f"  exact dual value at (1,3): {gw.dual_uniform(1, 3)[1]} = "
          f"{float(gw.dual_uniform(1, 3)[1]):.5f}")
