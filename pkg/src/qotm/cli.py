"""Batch command-line front end.

Subcommands: simulate, attack, sdp (build/solve/verify), count-r, report.
Exit codes: 0 pass, 1 assertion/verification failure, 2 usage error,
3 enumeration/solver size cap exceeded, 4 solver non-convergence.

Every command is deterministic given --seed; without --seed a fresh seed is
drawn from entropy and printed so the run can be reproduced.
"""

from __future__ import annotations

import argparse
import json
import secrets
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import numpy as np

from . import adversary, report, security_sdp as gw, solver as sdp
from .protocol import make_rng, run_honest

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_SIZE_CAP = 3
EXIT_NO_CONVERGENCE = 4


def _resolve_seed(args) -> int:
    if args.seed is None:
        seed = secrets.randbits(63)
        # stderr so that --json output remains a single parseable document
        print(
            f"seed: {seed} (drawn from entropy; pass --seed {seed} to reproduce)",
            file=sys.stderr,
        )
        return seed
    return args.seed


def _emit(args, doc: dict, text_lines: list[str]) -> None:
    if getattr(args, "json", False):
        print(json.dumps(doc, indent=1, sort_keys=True))
    else:
        for line in text_lines:
            print(line)


def cmd_simulate(args) -> int:
    seed = _resolve_seed(args)
    if args.n < 1:
        print("error: --n must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    rng = make_rng(seed)
    successes = sum(
        run_honest(args.n, args.s0, args.s1, args.b, rng) == (args.s1 if args.b else args.s0)
        for _ in range(args.trials)
    )
    all_ok = successes == args.trials
    doc = {
        "versions": report.versions(),
        "command": "simulate",
        "params": {
            "n": args.n,
            "s0": args.s0,
            "s1": args.s1,
            "b": args.b,
            "trials": args.trials,
            "seed": seed,
        },
        "simulate": {"trials": args.trials, "successes": successes, "all_returned_sb": all_ok},
    }
    _emit(args, doc, [f"{successes}/{args.trials} runs returned s_b"])
    return EXIT_OK if all_ok else EXIT_FAIL


def _mc_chunk(strategy, n, s0, s1, trials, seed, worker):
    rng = np.random.Generator(np.random.Philox(seed).jumped(worker))
    fn = {
        "naive": adversary.naive_reuse_attack,
        "breidbart": adversary.breidbart_attack,
    }[strategy]
    return fn(n, s0, s1, trials, rng).successes


def _run_mc(strategy, n, s0, s1, trials, seed, jobs) -> adversary.AttackStats:
    if jobs <= 1:
        return _mc_chunk_stats(strategy, n, s0, s1, trials, seed)
    sizes = [trials // jobs + (1 if w < trials % jobs else 0) for w in range(jobs)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futs = [
            pool.submit(_mc_chunk, strategy, n, s0, s1, sz, seed, w)
            for w, sz in enumerate(sizes)
            if sz > 0
        ]
        successes = sum(f.result() for f in futs)
    return adversary.AttackStats(trials, successes)


def _mc_chunk_stats(strategy, n, s0, s1, trials, seed) -> adversary.AttackStats:
    return adversary.AttackStats(trials, _mc_chunk(strategy, n, s0, s1, trials, seed, 0))


def cmd_attack(args) -> int:
    seed = _resolve_seed(args)
    strategy = args.strategy
    doc = {
        "versions": report.versions(),
        "command": "attack",
        "params": {
            "strategy": strategy,
            "seed": seed,
            "trials": args.trials,
            "s0": args.s0,
            "s1": args.s1,
            "jobs": args.jobs,
        },
    }
    lines = []
    if strategy in ("naive", "breidbart"):
        if args.n is None or args.n < 1:
            print("error: --n >= 1 required for this strategy", file=sys.stderr)
            return EXIT_USAGE
        doc["params"]["n"] = args.n
        stats = _run_mc(strategy, args.n, args.s0, args.s1, args.trials, seed, args.jobs)
        analytic = (
            adversary.naive_reuse_rate(args.n)
            if strategy == "naive"
            else adversary.breidbart_rate(args.n)
        )
        field = report.attack_field(stats, analytic=analytic)
        ok = field["within_band"]
        lines.append(
            f"{strategy}: rate {stats.rate:.4f} +- {stats.stderr:.4f} "
            f"(analytic {analytic:.4f}) over {stats.trials} trials"
            + ("" if ok else "  [OUTSIDE 4-sigma BAND]")
        )
    elif strategy == "exhaust-n1":
        if args.n not in (None, 1):
            print("error: exhaust-n1 forces --n 1", file=sys.stderr)
            return EXIT_USAGE
        doc["params"]["n"] = 1
        stats = adversary.exhaust_attack_n1(args.s0, args.s1, args.trials, make_rng(seed))
        field = report.attack_field(stats, analytic=1.0)
        ok = stats.rate == 1.0
        lines.append(
            f"exhaust-n1: rate {stats.rate:.4f} over {stats.trials} trials "
            f"(3 token queries per trial; analytic 1.0)"
        )
    elif strategy == "bounded-key":
        if args.n is None or args.delta0 is None or args.delta1 is None:
            print("error: bounded-key requires --n, --delta0, --delta1", file=sys.stderr)
            return EXIT_USAGE
        doc["params"].update(n=args.n, delta0=args.delta0, delta1=args.delta1)
        rng = make_rng(seed)
        try:
            inst = adversary.make_toy_ma(args.n, args.delta0, args.delta1, args.s0, args.s1, rng)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        stats = adversary.bounded_key_attack(inst, args.trials, rng)
        bound = 1.0 / max(args.delta0, args.delta1) ** 2
        field = report.attack_field(stats, lower_bound=bound)
        ok = field["within_band"]
        lines.append(
            f"bounded-key: rate {stats.rate:.4f} +- {stats.stderr:.4f} "
            f">= 1/Delta^2 = {bound:.4f} over {stats.trials} trials"
            + ("" if ok else "  [BELOW BOUND]")
        )
    elif strategy == "rewind":
        if args.n is None or args.n < 1:
            print("error: --n >= 1 required for rewind", file=sys.stderr)
            return EXIT_USAGE
        doc["params"]["n"] = args.n
        rng = make_rng(seed)
        d0 = args.delta0 or 2
        d1 = args.delta1 or 2
        doc["params"].update(delta0=d0, delta1=d1)
        good = 0
        for _ in range(args.trials):
            inst = adversary.make_toy_ma(args.n, d0, d1, args.s0, args.s1, rng)
            got0, got1, fid = adversary.rewind_attack(inst, rng)
            if got0 == args.s0 and got1 == args.s1 and fid > 1.0 - 1e-10:
                good += 1
        stats = adversary.AttackStats(args.trials, good)
        field = report.attack_field(stats, analytic=1.0)
        ok = stats.rate == 1.0
        lines.append(
            f"rewind: extracted both bits on {good}/{args.trials} random instances "
            f"(deterministic attack; analytic 1.0)"
        )
    else:  # pragma: no cover - argparse restricts choices
        return EXIT_USAGE
    doc["attacks"] = {strategy: field}
    _emit(args, doc, lines)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_count_r(args) -> int:
    if args.n < 1 or args.m < 1:
        print("error: need --n >= 1 and --m >= 1", file=sys.stderr)
        return EXIT_USAGE
    closed = gw.count_R_closed(args.n, args.m)
    counts = {"T": str(gw.cardinality_T(args.m)), "R_closed": str(closed)}
    lines = [f"|T|(m={args.m}) = {counts['T']}", f"|R| closed form = {closed}"]
    if args.brute:
        try:
            brute = gw.count_R_brute(args.n, args.m)
        except gw.SizeCapError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_SIZE_CAP
        counts["R_brute"] = str(brute)
        counts["match"] = brute == closed
        lines.append(f"|R| brute force  = {brute}  {'MATCH' if counts['match'] else 'MISMATCH'}")
    beta = gw.beta_exact(args.n, args.m)
    lines.append(f"beta = {beta} = {float(beta):.6g}")
    doc = {
        "versions": report.versions(),
        "command": "count-r",
        "params": {"n": args.n, "m": args.m, "seed": 0},
        "counts": counts,
    }
    _emit(args, doc, lines)
    if args.brute and not counts["match"]:
        return EXIT_FAIL
    return EXIT_OK


def cmd_sdp_build(args) -> int:
    try:
        build = gw.build_primal_instance if args.which == "primal" else gw.build_dual_instance
        inst = build(args.n, args.m)
    except (gw.SizeCapError, sdp.SizeCapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIZE_CAP
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = sdp.export(inst, args.format)
    with open(args.out, "w") as fh:
        fh.write(text)
    print(f"wrote {args.which} instance (n={args.n}, m={args.m}) to {args.out} [{args.format}]")
    return EXIT_OK


def cmd_sdp_solve(args) -> int:
    with open(args.infile) as fh:
        inst = sdp.from_json(fh.read())
    try:
        inst.validate()
    except sdp.SizeCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIZE_CAP
    sol = sdp.solve(inst, sdp.SolveOptions(tol=args.tol, max_iters=args.max_iters))
    cert = sdp.verify_certificate(inst, sol, 10 * args.tol)
    doc = {
        "versions": report.versions(),
        "command": "sdp-solve",
        "params": {"seed": 0},
        "sdp": report.sdp_field(sol, cert.worst[1]),
    }
    _emit(
        args,
        doc,
        [
            f"{sol.objective:.4f} {sol.status} "
            f"(iters {sol.iterations}, max residual {cert.worst[1]:.2e}, {sol.wall_ms:.0f} ms)"
        ],
    )
    if sol.status != "optimal":
        return EXIT_NO_CONVERGENCE
    return EXIT_OK if cert.passed else EXIT_FAIL


def cmd_sdp_verify(args) -> int:
    try:
        if args.which == "dual":
            ys, beta = gw.dual_uniform(args.n, args.m)
            q = gw.build_Q1(args.n, args.m)
            rep = gw.verify_dual(ys, q, tol=args.tol)
            rows = [
                (f"dual constraint {i + 1} min-eig", float(r))
                for i, r in enumerate(rep.constraint_residuals)
            ]
            rows.append(("objective vs exact beta", abs(rep.objective_numeric - float(beta))))
            passed = rep.passed
            extra = {
                "beta": report.fraction_field(beta),
                "objective": report.measured(rep.objective_numeric, "numeric"),
            }
            lines = [f"beta = {beta} = {float(beta):.6g}"]
        else:
            q = gw.build_Q1(args.n, args.m)
            if args.which == "trivial":
                chain = gw.trivial_feasible(args.n, args.m)
                p = 1.0
            else:
                chain, p = gw.linear_bound_feasible(args.n, args.m)
            rep = gw.verify_primal_chain(chain, q, tol=args.tol)
            rows = rep.rows()
            passed = rep.passed
            extra = {"p": report.measured(p, "formula")}
            lines = [f"p = {p:.6g}"]
    except (gw.SizeCapError, sdp.SizeCapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIZE_CAP
    for check, residual in rows:
        lines.append(f"  {check:<34} {residual: .3e}")
    lines.append("PASS" if passed else "FAIL")
    doc = {
        "versions": report.versions(),
        "command": "sdp-verify",
        "params": {"n": args.n, "m": args.m, "seed": 0},
        "verify": {
            "which": args.which,
            "passed": passed,
            "rows": [{"check": c, "residual": float(r)} for c, r in rows],
            **extra,
        },
    }
    _emit(args, doc, lines)
    return EXIT_OK if passed else EXIT_FAIL


def cmd_report(args) -> int:
    seed = _resolve_seed(args)
    try:
        m_list = [int(tok) for tok in args.m_list.split(",") if tok]
    except ValueError:
        print("error: --m-list must be comma-separated integers", file=sys.stderr)
        return EXIT_USAGE
    if args.n < 1 or not m_list or min(m_list) < 1:
        print("error: need --n >= 1 and m values >= 1", file=sys.stderr)
        return EXIT_USAGE
    doc = report.build_report(
        args.n, m_list, seed, trials=args.trials, solve=args.solve, tol=args.tol
    )
    text = json.dumps(doc, indent=1, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"wrote report for n={args.n}, m in {m_list} to {args.out}")
    else:
        print(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="qotm",
        description="Conjugate-coding one-time memory: protocol simulation, "
        "attacks, and the cheating-probability SDP analysis.",
    )
    sub = ap.add_subparsers(dest="cmd", required=True)

    sim = sub.add_parser("simulate", help="run the honest protocol")
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--s0", type=int, choices=(0, 1), default=0)
    sim.add_argument("--s1", type=int, choices=(0, 1), default=1)
    sim.add_argument("--b", type=int, choices=(0, 1), default=0)
    sim.add_argument("--trials", type=int, default=1000)
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--json", action="store_true")
    sim.set_defaults(fn=cmd_simulate)

    att = sub.add_parser("attack", help="run an attack strategy")
    att.add_argument(
        "--strategy",
        required=True,
        choices=("naive", "breidbart", "exhaust-n1", "rewind", "bounded-key"),
    )
    att.add_argument("--n", type=int, default=None)
    att.add_argument("--s0", type=int, choices=(0, 1), default=0)
    att.add_argument("--s1", type=int, choices=(0, 1), default=1)
    att.add_argument("--delta0", type=int, default=None)
    att.add_argument("--delta1", type=int, default=None)
    att.add_argument("--trials", type=int, default=100000)
    att.add_argument("--seed", type=int, default=None)
    att.add_argument("--jobs", type=int, default=1)
    att.add_argument("--json", action="store_true")
    att.set_defaults(fn=cmd_attack)

    cr = sub.add_parser("count-r", help="cardinalities |T| and |R|, exact")
    cr.add_argument("--n", type=int, required=True)
    cr.add_argument("--m", type=int, required=True)
    cr.add_argument("--brute", action="store_true")
    cr.add_argument("--json", action="store_true")
    cr.set_defaults(fn=cmd_count_r)

    sp = sub.add_parser("sdp", help="build/solve/verify the cheating SDP")
    spsub = sp.add_subparsers(dest="sdp_cmd", required=True)

    spb = spsub.add_parser("build", help="write an instance file")
    spb.add_argument("--n", type=int, required=True)
    spb.add_argument("--m", type=int, required=True)
    spb.add_argument("--which", choices=("primal", "dual"), default="primal")
    spb.add_argument("--out", required=True)
    spb.add_argument("--format", choices=("json", "sdpa-sparse"), default="json")
    spb.set_defaults(fn=cmd_sdp_build)

    sps = spsub.add_parser("solve", help="solve an instance file")
    sps.add_argument("--in", dest="infile", required=True, metavar="PATH")
    sps.add_argument("--tol", type=float, default=1e-6)
    sps.add_argument("--max-iters", type=int, default=100000)
    sps.add_argument("--json", action="store_true")
    sps.set_defaults(fn=cmd_sdp_solve)

    spv = spsub.add_parser("verify", help="verify a closed-form solution")
    spv.add_argument("--n", type=int, required=True)
    spv.add_argument("--m", type=int, required=True)
    spv.add_argument("--which", choices=("trivial", "linear", "dual"), required=True)
    spv.add_argument("--tol", type=float, default=1e-9)
    spv.add_argument("--json", action="store_true")
    spv.set_defaults(fn=cmd_sdp_verify)

    rep = sub.add_parser("report", help="aggregate all quantities for an (n, m) grid")
    rep.add_argument("--n", type=int, required=True)
    rep.add_argument("--m-list", required=True, help="comma-separated m values")
    rep.add_argument("--out", default=None)
    rep.add_argument("--trials", type=int, default=20000)
    rep.add_argument("--seed", type=int, default=None)
    rep.add_argument("--solve", action="store_true")
    rep.add_argument("--tol", type=float, default=1e-6)
    rep.set_defaults(fn=cmd_report)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0,) else 0
    try:
        return args.fn(args)
    except (gw.SizeCapError, sdp.SizeCapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIZE_CAP
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AssertionError as exc:
        print(f"assertion failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


def entrypoint() -> None:  # console_scripts hook
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
