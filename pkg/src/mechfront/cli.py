"""Command line front end.

Verbs:
  opt        optimal makespan of an instance (optionally masked by a
             mechanism's equilibrium winner sets, min or max)
  equilibria enumerate one task's (or every task's) grid equilibria
  analyze    per-instance inefficiency report for a mechanism
  frontier   CSV sweep of analytic bounds vs. measured ratios over alpha
  probe      winner-reach matrix of a single-task rule
  verify     run a named property suite (exit 1 when a property fails)
  gen        write a generated instance (or matrix/vector) to a file

Exit codes: 0 ok, 1 property violation, 2 usage or bad input, 3 budget
refused.  Identical argv (plus seed) produce byte-identical stdout; floats
are printed with 6 significant digits, instance files are written lossless.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

from . import analysis, equilibria, instances
from .model import BudgetExceededError, MechanismId, UnsupportedMechanismError
from .optsolver import opt_makespan, opt_makespan_masked
from .rules import rule_for


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _round6(obj):
    """6-significant-digit copy of a JSON-ready structure (reports only;
    generated instances are saved lossless)."""
    if isinstance(obj, float):
        return float(f"{obj:.6g}") if math.isfinite(obj) else obj
    if isinstance(obj, dict):
        return {k: _round6(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round6(v) for v in obj]
    return obj


def _dump(data) -> str:
    return json.dumps(_round6(data), indent=1, default=lambda o: repr(o))


def _load_instance(path: str):
    if path.endswith(".txt"):
        return instances.load_text(path)
    return instances.load_instance(path)


def _grid_for(inst, mech, spec):
    """`spec` is the --grid flag value "eps,H" or None for the default grid."""
    if spec is None:
        return equilibria.default_grid(inst, mech)
    parts = spec.split(",")
    if len(parts) != 2:
        raise ValueError(f"--grid wants 'eps,H', got {spec!r}")
    eps, cap = float(parts[0]), float(parts[1])
    entries = {x for row in inst.times for x in row
               if x < inst.big and x <= cap and equilibria.on_grid(x, eps)}
    return equilibria.Grid(eps, cap, anchors=tuple(sorted(entries)))


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mechfront", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="verb", required=True)

    q = sub.add_parser("opt", help="optimal makespan, optionally masked")
    q.add_argument("-i", "--instance", required=True)
    q.add_argument("--mech", help="mask by this mechanism's winner sets (fp, sp, spa:A)")
    q.add_argument("--objective", choices=("min", "max"), default="min")

    q = sub.add_parser("equilibria", help="enumerate grid equilibria per task")
    q.add_argument("-i", "--instance", required=True)
    q.add_argument("--mech", required=True)
    q.add_argument("--task", type=int, help="single task index (default: all)")
    q.add_argument("--grid", metavar="EPS,H",
                   help="bid grid step and top (default: 0.1, alpha*max_finite + 0.2)")
    q.add_argument("--budget", type=int, default=equilibria.ENUMERATION_BUDGET)

    q = sub.add_parser("analyze", help="inefficiency report")
    q.add_argument("-i", "--instance", required=True)
    q.add_argument("--mech", required=True)

    q = sub.add_parser("frontier", help="bounds vs. measured ratios per alpha (CSV)")
    q.add_argument("-n", type=int, required=True)
    q.add_argument("--alphas", required=True, help="comma list, e.g. 1,1.5,2,4")
    q.add_argument("--threads", type=int)
    q.add_argument("--suite", help="semicolon list of generators, e.g. "
                                   "'uniform:n=3;hat:n=3,alpha=2' (default: built-in)")

    q = sub.add_parser("probe", help="winner-reach matrix of a rule")
    q.add_argument("--mech", required=True)
    q.add_argument("-n", type=int, required=True)
    q.add_argument("--eps", type=float, default=0.5)
    q.add_argument("--cap", type=float, help="grid top (default: 2*reach + 1)")
    q.add_argument("--budget", type=int, default=equilibria.ENUMERATION_BUDGET)

    q = sub.add_parser("verify", help="run a property suite")
    q.add_argument("--suite", default="all",
                   choices=sorted(analysis.VERIFY_SUITES) + ["all"])
    q.add_argument("--seed", type=int, default=0)

    q = sub.add_parser("gen", help="write a generated instance to a file")
    q.add_argument("name", help="uniform | tradeoff | fp_pos | hat | tilde | "
                                "thm3_hat | random | canonical | circulant")
    q.add_argument("params", nargs="*", help="key=value pairs, e.g. n=3 alpha=2")
    q.add_argument("-o", "--out", required=True)
    q.add_argument("--text", action="store_true", help="write the text format")
    return p


def run(argv) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code else 0
    try:
        return _dispatch(args)
    except BudgetExceededError as e:
        print(f"budget refused: {e}", file=sys.stderr)
        return 3
    except (ValueError, OSError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    if args.verb == "opt":
        inst = _load_instance(args.instance)
        if args.mech:
            mech = MechanismId.parse(args.mech)
            mask = equilibria.achievable_winners(mech, inst).to_mask()
            value, witness = opt_makespan_masked(inst, mask, args.objective)
            print(_dump({"mech": str(mech), "objective": args.objective,
                         "value": value, "witness": list(witness)}))
        else:
            value, witness = opt_makespan(inst)
            print(_dump({"opt": value, "witness": list(witness)}))
        return 0

    if args.verb == "equilibria":
        inst = _load_instance(args.instance)
        mech = MechanismId.parse(args.mech)
        if mech.kind == "greedy":
            raise UnsupportedMechanismError("greedy has no per-task equilibria")
        rule = rule_for(mech, inst.n)
        grid = _grid_for(inst, mech, args.grid)
        tasks = [args.task] if args.task is not None else list(range(inst.m))
        rows = []
        for j in tasks:
            if not 0 <= j < inst.m:
                raise ValueError(f"task {j} out of range")
            res = equilibria.enumerate_equilibria(rule, inst.column(j), grid, args.budget)
            rows.append({"task": j, "profiles": len(res),
                         "winners": sorted(res.winner_union())})
        print(_dump({"mech": str(mech), "eps": grid.step,
                     "cap": float(grid.points[-1]), "tasks": rows}))
        return 0

    if args.verb == "analyze":
        inst = _load_instance(args.instance)
        mech = MechanismId.parse(args.mech)
        report = analysis.inefficiency(mech, inst)
        print(_dump(report.to_dict()))
        return 0

    if args.verb == "frontier":
        alphas = sorted(float(a) for a in args.alphas.split(","))
        suite = None
        if args.suite:
            suite = [instances.GeneratorSpec.parse(s)
                     for s in args.suite.split(";") if s.strip()]
        points = analysis.frontier_sweep(args.n, alphas, suite, args.threads)
        print("alpha,poa_bound,pos_bound,poa_emp,pos_emp")
        for pt in points:
            print(",".join(_fmt(v) for v in
                           (pt.alpha, pt.poa_bound, pt.pos_bound, pt.poa_emp, pt.pos_emp)))
        return 0

    if args.verb == "probe":
        mech = MechanismId.parse(args.mech)
        rule = rule_for(mech, args.n)
        if args.cap is not None:
            cap = args.cap
        else:
            reach = mech.alpha if mech.kind == "spa" else 1.0
            cap = 2 * reach + 1
        k = max(2, round(cap / args.eps))
        anchors = (1.0,) if equilibria.on_grid(1.0, args.eps) else ()
        grid = equilibria.Grid(args.eps, k * args.eps, anchors=anchors)
        matrix = analysis.probe_matrix(rule, args.n, args.eps, grid, args.budget)
        print(_dump({"mech": str(mech), "eps": matrix.eps,
                     "a": [list(r) for r in matrix.a]}))
        return 0

    if args.verb == "verify":
        names = sorted(analysis.VERIFY_SUITES) if args.suite == "all" else [args.suite]
        failed = False
        for name in names:
            report = analysis.VERIFY_SUITES[name](args.seed)
            status = "pass" if report.passed else "FAIL"
            print(f"{name}: {status}")
            for line in report.lines:
                print(line)
            failed = failed or not report.passed
        return 1 if failed else 0

    if args.verb == "gen":
        spec_text = args.name
        if args.params:
            spec_text += ":" + ",".join(args.params)
        spec = instances.GeneratorSpec.parse(spec_text)
        built = spec.build()
        if isinstance(built, instances.Instance):
            if args.text:
                instances.save_text(built, args.out)
            else:
                instances.save_instance(built, args.out)
        elif spec.name == "circulant":
            with open(args.out, "w") as f:
                json.dump({"name": spec.label(), "a": [list(r) for r in built]}, f, indent=1)
                f.write("\n")
        else:  # canonical vector
            with open(args.out, "w") as f:
                json.dump({"name": spec.label(), "vector": list(built)}, f, indent=1)
                f.write("\n")
        print(f"wrote {spec.label()} to {args.out}")
        return 0

    raise ValueError(f"unhandled verb {args.verb!r}")


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
