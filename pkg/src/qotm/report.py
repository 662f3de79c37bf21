"""Report assembly: one JSON document aggregating every quantity the package
computes for an (n, m) grid.

Every float is wrapped as {"value": x, "provenance": p} with p one of
"formula" (closed form), "numeric" (dense linear algebra), or "monte-carlo".
Fields whose inputs exceed the desk-scale enumeration or solver caps are
omitted, never approximated silently.
"""

from __future__ import annotations

from fractions import Fraction

from . import __version__, adversary, security_sdp as gw, solver as sdp
from .protocol import make_rng

SCHEMA_VERSION = 1


def measured(value: float, provenance: str) -> dict:
    assert provenance in ("formula", "numeric", "monte-carlo")
    return {"value": float(value), "provenance": provenance}


def versions() -> dict:
    return {"artifact": __version__, "schema": SCHEMA_VERSION}


def fraction_field(fr: Fraction, provenance: str = "formula") -> dict:
    return {
        "numerator": str(fr.numerator),
        "denominator": str(fr.denominator),
        "float": measured(float(fr), provenance),
    }


def attack_field(stats: adversary.AttackStats, analytic: float | None = None,
                 lower_bound: float | None = None, band_sigma: float = 4.0) -> dict:
    out = {
        "trials": stats.trials,
        "successes": stats.successes,
        "rate": measured(stats.rate, "monte-carlo"),
        "stderr": stats.stderr,
    }
    if analytic is not None:
        out["analytic"] = measured(analytic, "formula")
        out["within_band"] = abs(stats.rate - analytic) <= band_sigma * max(stats.stderr, 1e-12)
    if lower_bound is not None:
        out["lower_bound"] = measured(lower_bound, "formula")
        out["within_band"] = stats.rate >= lower_bound - 3.0 * stats.stderr
    return out


def counts_field(n: int, m: int, brute: bool) -> dict:
    closed = gw.count_R_closed(n, m)
    out = {"T": str(gw.cardinality_T(m)), "R_closed": str(closed)}
    if brute:
        b = gw.count_R_brute(n, m)
        out["R_brute"] = str(b)
        out["match"] = b == closed
    return out


def sdp_field(sol: sdp.SdpSolution, residual_max: float) -> dict:
    return {
        "primal_value": measured(sol.objective, "numeric"),
        "status": sol.status,
        "residual_max": residual_max,
        "iters": sol.iterations,
        "wall_ms": sol.wall_ms,
    }


def grid_point(
    n: int,
    m: int,
    seed: int,
    trials: int = 0,
    solve: bool = False,
    tol: float = 1e-6,
) -> dict:
    """All quantities for one (n, m): counts, beta, bounds, and optionally the
    enumerated spectrum, Monte-Carlo attacks, and the solved primal."""
    enumerable = n <= gw.MAX_ENUM_N and m <= gw.MAX_ENUM_M
    beta = gw.beta_exact(n, m)
    heuristic = gw.heuristic_bound(n, m)
    point = {
        "m": m,
        "cardinalities": counts_field(n, m, brute=enumerable),
        "beta": fraction_field(beta),
        "bounds": {
            "linear_p": measured(gw.linear_bound_p(n, m), "formula"),
            "heuristic": measured(heuristic, "formula"),
            "beta_over_heuristic": measured(float(beta) / heuristic, "formula"),
        },
    }
    lam = {"formula": measured(gw.lambda_max_formula(n), "formula")}
    if enumerable and m >= 2:
        q = gw.build_Q1(n, m)
        lam["numeric"] = measured(gw.lambda_max_numeric(q), "numeric")
    point["lambda_max"] = lam
    if trials > 0:
        rng = make_rng([seed, n, m])
        point["attacks"] = {
            "naive": attack_field(
                adversary.naive_reuse_attack(n, 0, 1, trials, rng),
                analytic=adversary.naive_reuse_rate(n),
            ),
            "breidbart": attack_field(
                adversary.breidbart_attack(n, 0, 1, trials, rng),
                analytic=adversary.breidbart_rate(n),
            ),
        }
    if solve and n == 1 and 2 <= m <= 3:
        inst = gw.build_primal_instance(n, m)
        sol = sdp.solve(inst, sdp.SolveOptions(tol=tol))
        cert = sdp.verify_certificate(inst, sol, 10 * tol)
        point["sdp"] = sdp_field(sol, cert.worst[1])
    return point


def build_report(
    n: int,
    m_list: list[int],
    seed: int,
    trials: int = 0,
    solve: bool = False,
    tol: float = 1e-6,
) -> dict:
    return {
        "versions": versions(),
        "command": "report",
        "params": {"n": n, "m_list": list(m_list), "seed": seed, "trials": trials},
        "results": [grid_point(n, m, seed, trials, solve, tol) for m in m_list],
    }
