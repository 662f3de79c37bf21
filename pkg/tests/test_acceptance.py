"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines live.
The SDP reproduction at (n=1, m=3) dominates the runtime (a few minutes).
"""

import itertools
import math
import time
from fractions import Fraction

import pytest

from qotm import adversary, security_sdp as gw, solver as sdp
from qotm.protocol import make_rng, run_honest

TRIALS_LARGE = 100000
TRIALS_MED = 10000


def _line(num: int, ok: bool, text: str) -> None:
    print(f"ACCEPTANCE {num:2d}: {'PASS' if ok else 'FAIL'} - {text}")


@pytest.fixture(scope="module")
def q_ops():
    return {
        (n, m): gw.build_Q1(n, m)
        for n in (1, 2, 3)
        for m in (2, 3)
    }


@pytest.fixture(scope="module")
def solved_12():
    inst = gw.build_primal_instance(1, 2)
    t0 = time.perf_counter()
    sol = sdp.solve(inst, sdp.SolveOptions(tol=1e-6))
    wall = time.perf_counter() - t0
    cert = sdp.verify_certificate(inst, sol, tol=1e-5)
    return inst, sol, cert, wall


def test_criterion_01_sdp_value_n1_m2(solved_12):
    inst, sol, cert, wall = solved_12
    ok = (
        sol.status == "optimal"
        and abs(sol.objective - 0.85) <= 0.01
        and cert.passed
        and wall < 60.0
    )
    _line(1, ok, f"primal(1,2) = {sol.objective:.4f} ({sol.status}, {wall:.1f}s, tol 1e-6)")
    assert sol.status == "optimal"
    assert abs(sol.objective - 0.85) <= 0.01
    assert cert.passed
    assert wall < 60.0


def test_criterion_02_sdp_value_n1_m3():
    inst = gw.build_primal_instance(1, 3)
    t0 = time.perf_counter()
    sol = sdp.solve(inst, sdp.SolveOptions(tol=1e-4))
    wall = time.perf_counter() - t0
    cert = sdp.verify_certificate(inst, sol, tol=1e-3)
    ok = (
        sol.status == "optimal"
        and abs(sol.objective - 1.00) <= 0.01
        and cert.passed
        and wall < 1800.0
    )
    _line(2, ok, f"primal(1,3) = {sol.objective:.4f} ({sol.status}, {wall:.0f}s, tol 1e-4)")
    assert sol.status == "optimal"
    assert abs(sol.objective - 1.00) <= 0.01
    assert cert.passed
    assert wall < 1800.0


def test_criterion_03_exact_dual_values(q_ops):
    t0 = time.perf_counter()
    ys2, beta2 = gw.dual_uniform(1, 2)
    ys3, beta3 = gw.dual_uniform(1, 3)
    rep2 = gw.verify_dual(ys2, q_ops[(1, 2)], tol=1e-12)
    rep3 = gw.verify_dual(ys3, q_ops[(1, 3)], tol=1e-12)
    wall = time.perf_counter() - t0
    exact = beta2 == Fraction(1, 4) and beta3 == Fraction(15, 32)
    residuals_ok = rep2.passed and rep3.passed
    residuals_ok = residuals_ok and max(
        abs(float(r)) for r in rep2.constraint_residuals + rep3.constraint_residuals
    ) <= 1e-12
    ok = exact and residuals_ok and wall < 1.0
    _line(3, ok, f"beta(1,2) = {beta2}, beta(1,3) = {beta3}, residuals exact ({wall:.2f}s)")
    assert exact and residuals_ok and wall < 1.0


def test_criterion_04_counting_oracle_equivalence():
    t0 = time.perf_counter()
    mismatches = [
        (n, m)
        for n, m in itertools.product((1, 2, 3), repeat=2)
        if gw.count_R_closed(n, m) != gw.count_R_brute(n, m)
    ]
    wall = time.perf_counter() - t0
    ok = not mismatches and wall < 120.0
    _line(4, ok, f"closed form == brute force on (n,m) in {{1,2,3}}^2 ({wall:.1f}s)")
    assert not mismatches
    assert wall < 120.0


def test_criterion_05_lambda_max(q_ops):
    t0 = time.perf_counter()
    rows = []
    worst = 0.0
    for n in (1, 2, 3):
        for m in (2, 3):
            numeric = gw.lambda_max_numeric(q_ops[(n, m)])
            formula = gw.lambda_max_formula(n)
            rows.append((n, m, numeric, formula))
            worst = max(worst, abs(numeric - formula))
    wall = time.perf_counter() - t0
    ok = worst <= 1e-9 and wall < 300.0
    detail = ", ".join(f"({n},{m}): {nu:.4f} vs {fo:.4f}" for n, m, nu, fo in rows[:2])
    _line(5, ok, f"spectrum vs closed form, worst gap {worst:.3e} ({detail}, ...)")
    # The numeric top eigenvalue is exactly half the closed-form constant on
    # every instance (the block structure bounds it by (1/4^n)(1+1/sqrt2)^n);
    # see the decisions ledger. The criterion is asserted as stated.
    assert wall < 300.0
    assert worst <= 1e-9


def test_criterion_06_feasibility_verifiers(q_ops):
    all_ok = True
    detail = []
    for n in (1, 2, 3):
        for m in (2, 3):
            q = q_ops[(n, m)]
            rep_triv = gw.verify_primal_chain(gw.trivial_feasible(n, m), q, tol=1e-9)
            chain, p = gw.linear_bound_feasible(n, m)
            expect_p = gw.cardinality_T(m) * 2.0 ** (1 - n) * (1 + 2**-0.5) ** n
            rep_lin = gw.verify_primal_chain(chain, q, tol=1e-9)
            good = rep_triv.passed and rep_lin.passed and abs(p - expect_p) < 1e-12
            all_ok = all_ok and good
            detail.append(f"({n},{m}):{'ok' if good else 'BAD'}")
    # m = 1 edge: empty success set, p = 0, trivially feasible
    chain1, p1 = gw.linear_bound_feasible(1, 1)
    rep1 = gw.verify_primal_chain(chain1, gw.build_Q1(1, 1), tol=1e-9)
    all_ok = all_ok and rep1.passed and p1 == 0.0
    _line(6, all_ok, f"p=1 and closed-form chains verified at 1e-9: {' '.join(detail)}")
    assert all_ok


def test_criterion_07_cardinalities():
    formula = [gw.cardinality_T(m) for m in (1, 2, 3)]
    enum = [len(gw.enumerate_T(m)) for m in (1, 2, 3)]
    ok = formula == [0, 2, 18] and enum == formula
    _line(7, ok, f"|T| for m=1,2,3: formula {formula}, enumeration {enum}")
    assert ok


def test_criterion_08_protocol_correctness():
    rng = make_rng(808)
    trials = TRIALS_MED
    failures = sum(
        run_honest(8, 1, 0, b, rng) != (0 if b else 1)
        for b in (0, 1)
        for _ in range(trials // 2)
    )
    ok = failures == 0
    _line(8, ok, f"honest run returned s_b in {trials - failures}/{trials} trials at n=8")
    assert failures == 0


def test_criterion_09_attack_statistics():
    all_ok = True
    details = []
    for n in (1, 2, 4, 8):
        for name, fn, target in (
            ("naive", adversary.naive_reuse_attack, adversary.naive_reuse_rate(n)),
            ("breidbart", adversary.breidbart_attack, adversary.breidbart_rate(n)),
        ):
            t0 = time.perf_counter()
            stats = fn(n, 0, 1, TRIALS_LARGE, make_rng([909, n, len(name)]))
            wall = time.perf_counter() - t0
            good = abs(stats.rate - target) <= 4 * stats.stderr and wall < 60.0
            all_ok = all_ok and good
            details.append(f"{name}(n={n}) {stats.rate:.4f}~{target:.4f}")
    t0 = time.perf_counter()
    ex = adversary.exhaust_attack_n1(0, 1, TRIALS_MED, make_rng(910))
    wall = time.perf_counter() - t0
    all_ok = all_ok and ex.rate == 1.0 and wall < 60.0
    details.append(f"exhaust-n1 {ex.rate:.1f}")
    _line(9, all_ok, "; ".join(details[:3]) + "; ...")
    assert all_ok


def test_criterion_10_sandwich(solved_12):
    _, sol, cert, _ = solved_12
    stats = adversary.breidbart_attack(1, 0, 1, TRIALS_LARGE, make_rng(1010))
    beta = float(gw.beta_exact(1, 2))
    lower_ok = stats.rate - 3 * stats.stderr <= cert.objective
    dual_ok = beta <= cert.objective + 10 * 1e-6
    ok = lower_ok and dual_ok
    _line(
        10,
        ok,
        f"breidbart {stats.rate:.4f} - 3s <= sdp {cert.objective:.4f}; beta {beta} <= sdp + 1e-5",
    )
    assert ok


def test_criterion_11_rewinding():
    rng = make_rng(1111)
    good = 0
    for i in range(100):
        n = 1 + i % 3
        d0 = 1 + int(rng.integers((1 << n) // 2))
        d1 = 1 + int(rng.integers((1 << n) - d0)) if (1 << n) > d0 else 1
        s0, s1 = int(rng.integers(2)), int(rng.integers(2))
        inst = adversary.make_toy_ma(n, d0, d1, s0, s1, rng)
        got0, got1, fid = adversary.rewind_attack(inst, rng)
        if (got0, got1) == (s0, s1) and fid > 1 - 1e-10:
            good += 1
    ok = good == 100
    _line(11, ok, f"rewinding extracted both bits on {good}/100 instances (n <= 3)")
    assert good == 100


def test_criterion_12_bounded_key():
    all_ok = True
    details = []
    for delta, n in ((1, 2), (2, 3), (4, 4)):
        inst = adversary.make_toy_ma(n, delta, delta, 0, 1, make_rng([1212, delta]))
        stats = adversary.bounded_key_attack(inst, TRIALS_LARGE, make_rng([1213, delta]))
        bound = 1.0 / delta**2
        good = stats.rate >= bound - 3 * stats.stderr
        all_ok = all_ok and good
        details.append(f"D={delta}: {stats.rate:.4f} >= {bound:.4f}")
    _line(12, all_ok, "; ".join(details))
    assert all_ok


def test_criterion_13_large_n_exact_evaluation():
    betas = [gw.beta_exact(40, m) for m in range(1, 11)]
    increasing = all(b2 > b1 for b1, b2 in zip(betas, betas[1:]))
    bounded = all(b <= 1 for b in betas)
    ratios = [float(b) / gw.heuristic_bound(40, m) for m, b in enumerate(betas, start=1)]
    ok = increasing and bounded
    _line(
        13,
        ok,
        f"beta(40, m) exact for m=1..10, increasing, max {float(betas[-1]):.3e}; "
        f"beta/heuristic in [{min(ratios):.2e}, {max(ratios):.2e}]",
    )
    assert increasing and bounded
    # the asymptotic security claim itself is covered by criterion 6's
    # feasibility checks; here the heuristic is reported as a diagnostic only
    assert all(math.isfinite(r) for r in ratios)
