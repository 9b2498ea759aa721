"""Command-line interface: generate, solve, validate, compare and bench.

Machine output (JSON, or CSV for ``bench``) goes to stdout; a one-line
summary goes to stderr. Exit codes: 0 ok, 1 infeasible or invalid solution,
2 usage error, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .core import (CKMError, Clustering, ContractError, InfeasibleError, Instance,
                   InvariantViolation, SizeGuardError, SolverError, StructuralError,
                   evaluate_cost, load_instance, validate)

EXIT_OK, EXIT_INFEASIBLE, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3
VARIANTS = ("nd-assignment", "nd-full", "disjoint-tree", "oracle-disjoint", "oracle-nd")
DISJOINT_VARIANTS = ("disjoint-tree", "oracle-disjoint")


class UsageError(CKMError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.replace(",", " ").split()]


def _edge_list(text: str) -> list[tuple[int, int]]:
    edges = []
    for tok in text.replace(",", " ").split():
        u, _, v = tok.partition("-")
        if not v:
            raise UsageError(f"edge {tok!r} is not of the form u-v")
        edges.append((int(u), int(v)))
    return edges


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=1)
    sys.stdout.write("\n")


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


# ---------------------------------------------------------------- generate

def cmd_generate(args) -> int:
    from . import generators as gen

    if args.family == "3sat":
        if args.cnf:
            with open(args.cnf) as fh:
                num_vars, clauses = gen.read_dimacs(fh.read())
        elif args.clauses:
            clauses = [[int(l) for l in c.split()] for c in args.clauses.split(";") if c.strip()]
            num_vars = args.vars
        else:
            raise UsageError("3sat needs --cnf or --clauses")
        inst = gen.gen_from_3sat(clauses, args.m, num_vars, args.epsilon)
    elif args.family == "domset":
        if args.n is None:
            raise UsageError("domset needs --n")
        inst = gen.gen_from_dominating_set(args.n, _edge_list(args.edges or ""))
    elif args.family == "star":
        inst = gen.gen_star(args.n or 6, args.seed, args.k, args.metric)
    elif args.family == "random":
        inst = gen.gen_random(args.n or 6, args.k, args.seed, args.model, args.p, args.metric)
    else:  # pragma: no cover - argparse restricts the choices
        raise UsageError(args.family)
    data = inst.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(data, fh, indent=1)
    else:
        _emit(data)
    _note(f"generated {args.family} instance: n={inst.n}, {len(inst.edges)} edges, k={inst.k}")
    return EXIT_OK


# ------------------------------------------------------------------ solve

def _solve(inst: Instance, variant: str, centers=None, k=None, lp_method="cut", trim=False) -> dict:
    """Run one variant; returns the JSON-ready result."""
    t0 = time.perf_counter()
    out: dict = {"variant": variant}
    if variant == "nd-assignment":
        from .assign_nd import assign_non_disjoint

        res = assign_non_disjoint(inst, centers, lp_method=lp_method, trim=trim)
        out.update(res.to_json())
    elif variant == "nd-full":
        from .centers_nd import find_centers

        res = find_centers(inst, k, lp_method=lp_method)
        out.update(res.to_json())
    elif variant == "disjoint-tree":
        from .tree_dp import solve_tree, solve_tree_fixed

        res = solve_tree_fixed(inst, centers) if centers else solve_tree(inst, k)
        out.update({"cost": _num(res.cost), **res.clustering.to_json()})
    elif variant == "oracle-disjoint":
        from .oracle import brute_force_disjoint

        res = brute_force_disjoint(inst, k, centers)
        out.update({"cost": _num(res.cost), **res.clustering.to_json()})
    elif variant == "oracle-nd":
        from .oracle import brute_force_non_disjoint

        res = brute_force_non_disjoint(inst, k, centers)
        out.update({"cost": _num(res.cost), **res.clustering.to_json()})
    else:
        raise UsageError(f"unknown variant {variant!r}")
    out["stats"] = {"seconds": round(time.perf_counter() - t0, 6), "n": inst.n,
                    "k": inst.k if k is None else k}
    return out


def _num(value):
    return value if isinstance(value, (int, float)) else float(value)


def _load(args) -> Instance:
    inst = load_instance(args.input, exact=getattr(args, "exact", False))
    if getattr(args, "k", None) is not None:
        inst = inst.with_k(args.k)
    return inst


def cmd_solve(args) -> int:
    inst = _load(args)
    centers = _int_list(args.centers) if args.centers else None
    if args.variant == "nd-assignment" and centers is None:
        centers = list(inst.centers) if inst.centers else None
        if centers is None:
            raise UsageError("nd-assignment needs --centers or centers in the instance")
    if args.dump_lp:
        from .lp import build_flow_assignment_lp, build_flow_center_lp

        lp = build_flow_assignment_lp(inst, centers) if centers else build_flow_center_lp(inst, inst.k)
        with open(args.dump_lp, "w") as fh:
            fh.write(lp.to_lp_format())
    out = _solve(inst, args.variant, centers, args.k, args.lp_method, args.trim)
    if args.trace:
        with open(args.trace, "w") as fh:
            json.dump(out, fh, indent=1)
    stages = out.pop("stages", None)
    if stages is not None and not args.trace:
        out["stats"]["stages"] = {"half_open_centers": stages["half_open"]["centers"],
                                  "final_centers": stages["z"]["centers"],
                                  "problems": stages["problems"]}
    out.pop("terminal_sets", None)
    _emit(out)
    _note(f"{args.variant}: cost {out['cost']} with {len(out['clusters'])} clusters")
    return EXIT_OK


# --------------------------------------------------------------- validate

def cmd_validate(args) -> int:
    inst = _load(args)
    with open(args.solution) as fh:
        data = json.load(fh)
    clustering = Clustering.from_json(data)
    disjoint = args.variant in DISJOINT_VARIANTS
    fixed = _int_list(args.centers) if args.centers else None
    problems = validate(inst, clustering, disjoint=disjoint, fixed_centers=fixed)
    cost = evaluate_cost(inst, clustering)
    if "cost" in data and abs(float(data["cost"]) - float(cost)) > 1e-6 * max(1.0, abs(float(cost))):
        problems.append(f"reported cost {data['cost']} differs from recomputed cost {float(cost)}")
    _emit({"valid": not problems, "violations": problems, "cost": _num(cost)})
    _note("valid" if not problems else f"invalid: {len(problems)} violation(s)")
    return EXIT_OK if not problems else EXIT_INFEASIBLE


# ---------------------------------------------------------------- compare

def cmd_compare(args) -> int:
    inst = _load(args)
    centers = _int_list(args.centers) if args.centers else (list(inst.centers) if inst.centers else None)
    variant = args.variant or ("nd-assignment" if centers else "nd-full")
    oracle = "oracle-disjoint" if variant in DISJOINT_VARIANTS else "oracle-nd"
    alg = _solve(inst, variant, centers if variant != "nd-full" else None, args.k, args.lp_method)
    opt = _solve(inst, oracle, centers if variant != "nd-full" else None, args.k)
    a, o = float(alg["cost"]), float(opt["cost"])
    ratio = 1.0 if a == o else (a / o if o > 0 else float("inf"))
    _emit({"variant": variant, "oracle": oracle, "cost": a, "optimum": o, "ratio": ratio,
           "lp_value": alg.get("lp_value")})
    _note(f"{variant}: {a:g} vs optimum {o:g} (ratio {ratio:.4g})")
    return EXIT_OK


# ------------------------------------------------------------------ bench

def _bench_small(seeds: int):
    from .generators import gen_random

    jobs = []
    for s in range(seeds):
        n = 5 + s % 3
        jobs.append(("small", f"random n={n} seed={s}", gen_random(n, 2, s, model="gnp", p=0.5), None))
    return jobs


def _bench_trees(seeds: int):
    from .generators import all_trees

    rng = np.random.default_rng(0)
    jobs = []
    for n in range(2, 7):
        for edges in all_trees(n):
            for _ in range(max(1, seeds // 10)):
                pts = rng.integers(0, 20, size=(n, 2))
                d = np.abs(pts[:, None, :] - pts[None, :, :]).sum(axis=-1).astype(float)
                inst = Instance(n, d, tuple(edges), 2, metric=True)
                jobs.append(("trees", f"tree n={n} {edges}", inst, None))
    return jobs


def _bench_reductions(seeds: int):
    from .generators import gen_from_3sat, gen_from_dominating_set
    from .oracle import brute_force_dominating_set, brute_force_sat

    jobs = []
    for clauses in ([[1, 2], [-1, 2], [1, -2]], [[1], [-1]], [[1, 2], [-2]], [[1, -2], [-1, 2], [1, 2], [-1, -2]]):
        a = max(abs(l) for c in clauses for l in c)
        m = 2
        sat = brute_force_sat(clauses, a) is not None
        jobs.append(("reductions", f"sat {clauses}", gen_from_3sat(clauses, m),
                     {"expected": 2 * a if sat else 2 * m, "exact": sat}))
    for edges in ([(0, 1), (1, 2)], [(0, 1), (1, 2), (2, 3)], [(0, 1), (0, 2), (0, 3)], [(0, 1), (2, 3)]):
        n = 1 + max(max(e) for e in edges)
        size, _ = brute_force_dominating_set(n, edges)
        jobs.append(("reductions", f"domset {edges}", gen_from_dominating_set(n, edges),
                     {"expected": size, "exact": True}))
    return jobs


def _bench_one(job):
    suite, name, inst, meta = job
    if meta is not None:
        # reductions: the optimum is predicted by the source problem
        variant = "oracle-nd" if inst.centers else "oracle-disjoint"
        res = _solve(inst, variant, list(inst.centers) if inst.centers else None)
        cost, target = float(res["cost"]), float(meta["expected"])
        holds = cost == target if meta["exact"] else cost >= target
        return {"suite": suite, "instance": name, "n": inst.n, "k": inst.k, "variant": variant,
                "cost": cost, "optimum": target, "ratio": round(cost / target, 6) if target else 1.0,
                "seconds": round(res["stats"]["seconds"], 4), "check": "ok" if holds else "FAILED"}
    if suite == "trees":
        variant, oracle, centers = "disjoint-tree", "oracle-disjoint", None
    else:
        variant, oracle, centers = "nd-full", "oracle-nd", None
    alg = _solve(inst, variant, centers)
    opt = _solve(inst, oracle, centers)
    a, o = float(alg["cost"]), float(opt["cost"])
    ratio = 1.0 if a == o else (a / o if o > 0 else float("inf"))
    return {"suite": suite, "instance": name, "n": inst.n, "k": inst.k, "variant": variant,
            "cost": a, "optimum": o, "ratio": round(ratio, 6),
            "seconds": round(alg["stats"]["seconds"], 4), "check": "ok" if a >= o - 1e-9 else "FAILED"}


def cmd_bench(args) -> int:
    build = {"small": _bench_small, "trees": _bench_trees, "reductions": _bench_reductions}[args.suite]
    jobs = build(args.seeds)
    with ThreadPoolExecutor(max_workers=args.workers) as pool:
        rows = list(pool.map(_bench_one, jobs))
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]) if rows else ["suite"])
    writer.writeheader()
    writer.writerows(rows)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    worst = max((r["ratio"] for r in rows), default=1.0)
    _note(f"bench {args.suite}: {len(rows)} instances, worst ratio {worst:.4g}")
    return EXIT_OK


# ------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ckm", description="Connected k-median: solvers, oracles and reductions.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    g = sub.add_parser("generate", help="write an instance as JSON")
    g.add_argument("--kind", dest="family", required=True, choices=["3sat", "domset", "star", "random"])
    g.add_argument("--cnf", help="DIMACS CNF file (3sat)")
    g.add_argument("--clauses", help="clauses as '1 -2; 2 3' (3sat)")
    g.add_argument("--vars", type=int, help="number of variables when --clauses is used")
    g.add_argument("--m", type=int, default=2, help="copies per clause and variable (3sat)")
    g.add_argument("--epsilon", type=float, help="in-group distance instead of 0 (3sat)")
    g.add_argument("--n", type=int, help="number of nodes (source graph size for domset)")
    g.add_argument("--edges", help="source graph edges as '0-1,1-2' (domset)")
    g.add_argument("--k", type=int, default=2)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--model", choices=["gnp", "tree", "grid"], default="gnp")
    g.add_argument("--p", type=float, default=0.4, help="edge probability for gnp")
    g.add_argument("--metric", choices=["euclidean", "shortest_path"], default="euclidean")
    g.add_argument("--out", help="write here instead of stdout")
    g.set_defaults(func=cmd_generate)

    def common(sp):
        sp.add_argument("--in", dest="input", required=True, help="instance JSON")
        sp.add_argument("--k", type=int, help="override k")
        sp.add_argument("--centers", help="fixed centers, e.g. '0,3'")
        sp.add_argument("--exact", action="store_true", help="read distances as exact rationals")

    s = sub.add_parser("solve", help="solve an instance")
    common(s)
    s.add_argument("--variant", choices=VARIANTS, required=True)
    s.add_argument("--lp-method", choices=["cut", "flow"], default="cut")
    s.add_argument("--trim", action="store_true", help="drop redundant memberships (nd-assignment)")
    s.add_argument("--trace", help="write the full result with stage data here")
    s.add_argument("--dump-lp", help="write the flow LP in CPLEX LP format here")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("validate", help="check a solution JSON against an instance")
    common(v)
    v.add_argument("--solution", required=True)
    v.add_argument("--variant", choices=VARIANTS, default="nd-assignment")
    v.set_defaults(func=cmd_validate)

    c = sub.add_parser("compare", help="algorithm cost against the brute-force optimum")
    common(c)
    c.add_argument("--variant", choices=["nd-assignment", "nd-full", "disjoint-tree"])
    c.add_argument("--lp-method", choices=["cut", "flow"], default="cut")
    c.set_defaults(func=cmd_compare)

    b = sub.add_parser("bench", help="run a benchmark suite and print CSV")
    b.add_argument("--suite", choices=["small", "trees", "reductions"], default="small")
    b.add_argument("--seeds", type=int, default=10)
    b.add_argument("--workers", type=int, default=4)
    b.add_argument("--out", help="write the CSV here instead of stdout")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        return args.func(args)
    except (UsageError, ContractError, StructuralError, SizeGuardError, FileNotFoundError,
            json.JSONDecodeError) as exc:
        _note(f"error: {exc}")
        return EXIT_USAGE
    except InfeasibleError as exc:
        _note(f"infeasible: {exc}")
        return EXIT_INFEASIBLE
    except (InvariantViolation, SolverError) as exc:
        _note(f"internal error: {exc}")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
