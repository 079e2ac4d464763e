"""Command line: ``polystab {analyze,convexify,spectral,estimate-constant,verify}``.

Exit status is 0 on success, 1 for bad input or usage, 2 when a numerical
check or inequality fails. JSON output uses sorted keys and shortest
round-trip floats, so identical flags give byte-identical output.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import acceptance
from . import convexify as cv
from . import manifold as mf
from . import polygon as pg
from . import spectral as sp
from .errors import InputError, PolystabError, SelfIntersecting, StepBudgetExceeded, VerificationError

EXIT_OK, EXIT_INPUT, EXIT_INVARIANT = 0, 1, 2


class UsageError(Exception):
    pass


def _default(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    if hasattr(v, "to_dict"):
        return v.to_dict()
    raise TypeError(f"not JSON serialisable: {type(v).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_default) + "\n"


def _emit(text: str, out: str | None = None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _n_values(args) -> list[int]:
    if getattr(args, "n_range", None):
        try:
            a, b = (int(s) for s in args.n_range.replace("..", ":").split(":"))
        except ValueError:
            raise UsageError(f"--n-range expects A:B, got {args.n_range!r}") from None
        ns = list(range(a, b + 1))
    elif args.n is not None:
        ns = [args.n]
    else:
        raise UsageError("give --n or --n-range")
    if not ns or min(ns) < 3:
        raise UsageError("n must be at least 3")
    return ns


# -- analyze ----------------------------------------------------------------


def stability_report(P: pg.Polygon, constant: float, source: str | None = None, seed=None) -> dict:
    m = pg.metrics(P)
    trace = cv.convexify(P)
    lhs = trace.tau + m.variation
    rhs = constant * m.delta
    return {
        "metrics": m.to_dict(),
        "tau": trace.tau,
        "alpha_c": trace.alpha_c,
        "inequality_check": {
            "lhs": lhs,
            "rhs": rhs,
            "constant_used": constant,
            "satisfied": bool(lhs <= rhs + 1e-9 * max(1.0, rhs)),
        },
        "provenance": {"input": source, "eps": P.eps, "seed": seed},
    }


def cmd_analyze(args) -> int:
    P = pg.read_polygon(args.path)
    if not pg.is_simple(P):
        raise SelfIntersecting("input polygon is not simple; tau is undefined")
    seed = None
    if args.constant is not None:
        C = args.constant
    else:
        seed = args.seed
        est = mf.estimate_ratio_sup(P.n, restarts=args.restarts, seed=seed)
        C = mf.combine_constants(P.n, est.sup_ratio).C_theorem
    rep = stability_report(P, C, str(args.path), seed)
    _emit(dumps(rep), args.out)
    return EXIT_OK if rep["inequality_check"]["satisfied"] else EXIT_INVARIANT


# -- convexify --------------------------------------------------------------


def _parse_random(tokens) -> dict:
    opts = {"n": None, "count": 1, "seed": 0}
    for tok in tokens:
        key, _, val = tok.partition("=")
        if key not in opts or not val:
            raise UsageError(f"--random expects n=.. count=.. seed=.., got {tok!r}")
        opts[key] = int(val)
    if opts["n"] is None or opts["n"] < 3 or opts["count"] < 1:
        raise UsageError("--random needs n >= 3 and count >= 1")
    return opts


def cmd_convexify(args) -> int:
    if args.random:
        opts = _parse_random(args.random)
        rows = []
        status = EXIT_OK
        for k, P in enumerate(pg.random_corpus(opts["n"], opts["count"], opts["seed"])):
            try:
                tr = cv.convexify(P, args.policy, args.max_steps)
            except StepBudgetExceeded as exc:
                tr = exc.trace
                status = EXIT_INVARIANT
            rows.append({"index": k, "steps": len(tr), "tau": tr.tau, "alpha_c": tr.alpha_c,
                         "complete": tr.complete, "convex": pg.is_convex(tr.final)})
            if not rows[-1]["convex"]:
                status = EXIT_INVARIANT
        summary = {
            "random": opts,
            "policy": args.policy,
            "terminated": sum(r["complete"] for r in rows),
            "max_steps": max(r["steps"] for r in rows),
            "polygons": rows,
        }
        _emit(dumps(summary), args.trace)
        if args.trace:
            print(f"{summary['terminated']}/{len(rows)} traces terminated, max {summary['max_steps']} flips")
        return status
    if args.path is None:
        raise UsageError("give a polygon file or --random")
    P = pg.read_polygon(args.path)
    tr = cv.convexify(P, args.policy, args.max_steps)
    if args.trace:
        Path(args.trace).write_text(dumps(tr.to_dict()))
    print(f"tau={tr.tau!r} alpha_c={tr.alpha_c!r} steps={len(tr)}")
    return EXIT_OK


# -- spectral ---------------------------------------------------------------


def cmd_spectral(args) -> int:
    ns = _n_values(args)
    if args.csv:
        Path(args.csv).write_text(sp.eigen_table_csv(ns))
    results = []
    for n in ns:
        b = sp.build_bundle(n)
        entry = {
            "n": n,
            "identities": sp.verify_identities(b, args.tol, seed=args.seed).to_dict(),
            "U_le_V": sp.check_U_le_V(b, args.samples, args.seed).to_dict(),
            "rayleigh": sp.rayleigh_report(b).to_dict(),
            "derivatives": sp.gradient_and_hessian_fd_check(n, check_hessian=n <= 12).to_dict(),
            "lambda": [sp.lambda_closed_form(n, k) for k in range(n)],
        }
        entry["derivatives"]["values"] = {
            k: v for k, v in entry["derivatives"]["values"].items() if not k.startswith("hess_")
        }
        results.append(entry)
    sys.stdout.write(dumps({"passed": True, "results": results}))
    return EXIT_OK


# -- estimate-constant ------------------------------------------------------


def cmd_estimate_constant(args) -> int:
    if args.restarts < 1:
        raise UsageError("--restarts must be at least 1")
    if args.exclusion <= 0:
        raise UsageError("--exclusion must be positive")
    ns = _n_values(args)
    records = []
    for n in ns:
        est = mf.estimate_ratio_sup(n, args.restarts, args.seed, args.exclusion, args.trajectories)
        const = mf.combine_constants(n, est.sup_ratio)
        records.append((est, const))
    if args.csv:
        head = "n,sup_ratio,limit_at_star,interior_sup,shell_ratio,C_s,C_r,C_tau,C_theorem,C_convex,restarts,seed"
        lines = [head]
        for est, c in records:
            vals = [est.sup_ratio, est.limit_at_star, est.interior_sup, est.shell_ratio,
                    c.C_s, c.C_r, c.C_tau, c.C_theorem, c.C_convex]
            lines.append(",".join([str(est.n)] + [repr(float(v)) for v in vals]
                                  + [str(est.restarts), str(est.seed)]))
        Path(args.csv).write_text("\n".join(lines) + "\n")
    doc = [
        {"estimate": est.to_dict(args.trajectories), "constants": c.to_dict()} for est, c in records
    ]
    _emit(dumps(doc[0] if len(doc) == 1 else doc), args.json)
    return EXIT_OK


# -- verify -----------------------------------------------------------------


def cmd_verify(args) -> int:
    results = acceptance.run_all(quick=not args.full)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_INVARIANT if failed else EXIT_OK


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="polystab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="deficit, variances, tau and the stability inequality for one polygon")
    a.add_argument("path")
    a.add_argument("--tau", action="store_true", help="accepted for compatibility; tau is always computed")
    a.add_argument("--out")
    a.add_argument("--constant", type=float, help="use this C instead of estimating one")
    a.add_argument("--restarts", type=int, default=8)
    a.add_argument("--seed", type=int, default=0)
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("convexify", help="flip pockets until convex")
    c.add_argument("path", nargs="?")
    c.add_argument("--trace", help="write the trace JSON here")
    c.add_argument("--policy", choices=[cv.FIRST_POCKET, cv.LARGEST_POCKET], default=cv.FIRST_POCKET)
    c.add_argument("--max-steps", type=int, default=1000)
    c.add_argument("--random", nargs="+", metavar="KEY=VAL", help="seeded corpus: n=10 count=200 seed=3")
    c.set_defaults(func=cmd_convexify)

    s = sub.add_parser("spectral", help="matrix identities, eigenvalues and derivative checks")
    s.add_argument("--n", type=int)
    s.add_argument("--n-range", help="A:B inclusive")
    s.add_argument("--samples", type=int, default=10_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--csv", help="write the eigenvalue table here")
    s.set_defaults(func=cmd_spectral)

    e = sub.add_parser("estimate-constant", help="empirical sup of f/g on M and the derived constants")
    e.add_argument("--n", type=int)
    e.add_argument("--n-range", help="A:B inclusive")
    e.add_argument("--restarts", type=int, default=8)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--exclusion", type=float, default=1e-3)
    e.add_argument("--json", help="write JSON here instead of stdout")
    e.add_argument("--csv", help="also write one CSV row per n")
    e.add_argument("--trajectories", action="store_true")
    e.set_defaults(func=cmd_estimate_constant)

    v = sub.add_parser("verify", help="run the acceptance checks")
    g = v.add_mutually_exclusive_group()
    g.add_argument("--quick", action="store_true", help="n <= 16, corpora of 50 (default)")
    g.add_argument("--full", action="store_true")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"polystab: usage error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InputError as exc:
        print(f"polystab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except VerificationError as exc:
        print(f"polystab: {type(exc).__name__}: {exc}", file=sys.stderr)
        if exc.report is not None:
            sys.stdout.write(dumps({"passed": False, "report": exc.report.to_dict()}))
        return EXIT_INVARIANT
    except PolystabError as exc:
        print(f"polystab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
