"""Command line: ``linematch gen|run|eval|analyze|twosided``.

Every subcommand prints JSON on stdout. Ids on the command line and in
files are 1-based.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from . import harness
from . import instances as im
from . import permgraph
from .core import (
    DomainError,
    Instance,
    InconsistentProfileError,
    Matching,
    OrdinalProfile,
    cost_profile,
    derive_profile,
    format_rational,
)
from .optimal import greedy_matching, greedy_optimal
from .ordermatch import run_order_match
from .twosided import (
    QueryOracle,
    TwoSidedInstance,
    fullpref_lb_witness,
    solve_one_sided_ranks,
    solve_zero_knowledge,
    two_sided_optimal,
)


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=1)
    sys.stdout.write("\n")


def _rats(xs):
    return [format_rational(x) for x in xs]


def _pairs(matching):
    return [[a + 1, g + 1] for a, g in enumerate(matching.item_of)]


def _load_kind(path, kind):
    obj = im.load(path)
    if not isinstance(obj, kind):
        raise im.ParseError(f"{path}: expected a {kind.__name__}, found {type(obj).__name__}")
    return obj


def cmd_gen(args) -> int:
    eps = Fraction(args.eps)
    fam = args.family
    if fam == "random":
        spec = im.GenSpec(args.n, args.seed, args.distribution, "two" if args.two_sided else "one", args.distinct)
        obj = im.gen_random(spec, index=args.index)
    elif fam in ("lb-k1", "lb-kgeq2"):
        victim = None if args.victim is None else args.victim - 1
        obj = im.gen_lower_bound(args.n, fam[3:], eps, victim=victim)
    elif fam in ("tiebreak-k1", "tiebreak-kgeq2"):
        delta = Fraction(args.delta) if args.delta else None
        obj = im.gen_tiebreak_pathology(args.n, fam[9:], eps, delta=delta)
    elif fam == "query-lb":
        queried = [int(q) - 1 for q in args.queried.split(",") if q.strip()] if args.queried else []
        top, bottom = fullpref_lb_witness(args.n, queried)
        if args.out:
            out = Path(args.out)
            im.save(out, top)
            im.save(out.with_name(out.stem + "_bottom" + out.suffix), bottom)
        _emit({"top": im.to_json(top), "bottom": im.to_json(bottom)})
        return 0
    else:
        raise DomainError(f"unknown family {fam!r}")
    if args.out:
        im.save(args.out, obj)
    _emit(im.to_json(obj))
    return 0


def cmd_run(args) -> int:
    instance = _load_kind(args.instance, Instance) if args.instance else None
    if args.profile:
        profile = _load_kind(args.profile, OrdinalProfile)
    elif instance is not None:
        profile = derive_profile(instance)
    else:
        raise DomainError("give --profile or --instance")
    if args.algo == "ordermatch":
        matching = run_order_match(profile).matching
    elif args.algo == "ordermatch-naive":
        if not args.anchors:
            raise DomainError("ordermatch-naive needs --anchors i,j")
        i, j = (int(x) - 1 for x in args.anchors.split(","))
        matching = run_order_match(profile, anchors=(i, j)).matching
    elif args.algo == "serial-dictatorship":
        matching = harness.serial_dictatorship(profile)
    elif args.algo == "optimal":
        if instance is None:
            raise DomainError("the optimal matching needs --instance")
        matching = greedy_matching(instance)
    else:
        raise DomainError(f"unknown algorithm {args.algo!r}")
    out = {"matching": _pairs(matching)}
    if instance is not None:
        costs = cost_profile(instance, matching)
        opt = greedy_optimal(instance).cost_per_k
        out["cost_per_k"] = _rats(costs)
        out["opt_cost_per_k"] = _rats(opt)
        if args.k:
            out["k"] = args.k
            out["cost"] = format_rational(costs[args.k - 1])
    _emit(out)
    return 0


def cmd_eval(args) -> int:
    config = harness.load_config(args.config) if args.config else harness.SweepConfig()
    overrides = {}
    if args.csv:
        overrides["csv_path"] = args.csv
    if args.json:
        overrides["json_path"] = args.json
    if args.workers:
        overrides["workers"] = args.workers
    if overrides:
        config = harness.SweepConfig(**{**config.__dict__, **overrides})
    report = harness.eval_sweep(config)
    _emit(
        {
            "rows": len(report.rows),
            "ok": report.ok,
            "max_ratio": {
                f"{f}/{a}/k={k}": ("inf" if v is None else format_rational(v))
                for (f, a, k), v in sorted(report.max_ratios().items())
            },
            "reproducers": report.reproducers,
        }
    )
    return 0 if report.ok else 1


def cmd_analyze(args) -> int:
    instance = _load_kind(args.instance, Instance)
    if args.algo != "ordermatch":
        raise DomainError("analyze supports --algo ordermatch only")
    result = run_order_match(derive_profile(instance))
    graph = permgraph.build_graph(instance, result.matching, result.partition)
    trace = permgraph.RemovalTrace()
    final = permgraph.remove_forward_edges(graph, instance, trace)
    violations = permgraph.check_edge_bound(instance, final)

    def edges(g):
        return [
            {"from": i + 1, "to": j + 1, "kind": kind, "cost": format_rational(permgraph.edge_cost(instance, g, i, j))}
            for (i, j), kind in zip(g.edges(), permgraph.edge_kinds(g))
        ]

    _emit(
        {
            "labels": [lab if isinstance(lab, str) else f"A{lab}" for lab in graph.label],
            "edges": edges(graph),
            "swaps": [
                {
                    "a1": s.a1 + 1,
                    "a2": s.a2 + 1,
                    "a3": s.a3 + 1,
                    "a4": s.a4 + 1,
                    "removed": _rats(s.removed),
                    "added": _rats(s.added),
                    "max_ok": s.max_ok,
                    "sum_ok": s.sum_ok,
                }
                for s in trace.swaps
            ],
            "transformed_edges": edges(final),
            "edge_bound_violations": [[i + 1, j + 1] for i, j in violations],
            "dot": permgraph.to_dot(graph),
        }
    )
    return 0 if not violations else 1


def cmd_twosided(args) -> int:
    if args.instance:
        inst = _load_kind(args.instance, TwoSidedInstance)
    else:
        inst = im.gen_random(im.GenSpec(args.n, args.seed, side="two", distinct=True))
    tr, gr = inst.taker_rankings(), inst.giver_rankings()
    if args.mode == "optimal":
        m = two_sided_optimal(tr, gr)
        out = {"matching": _pairs(m), "rank_queries": 0, "full_queries": 2 * inst.n, "bound": None, "within_bound": True}
    else:
        oracle = QueryOracle(inst)
        res = solve_one_sided_ranks(oracle, tr) if args.mode == "ranks1side" else solve_zero_knowledge(oracle)
        out = {
            "matching": _pairs(res.matching),
            "rank_queries": res.rank_queries,
            "full_queries": res.full_queries,
            "bound": res.bound,
            "within_bound": res.within_bound,
        }
    out["cost_per_k"] = _rats(cost_profile(inst.as_one_sided(), _matching_from_pairs(out["matching"])))
    _emit(out)
    return 0 if out["within_bound"] else 1


def _matching_from_pairs(pairs):
    item_of = [0] * len(pairs)
    for a, g in pairs:
        item_of[a - 1] = g - 1
    return Matching(item_of)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="linematch", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log fallback activations and progress")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate an instance")
    g.add_argument("--family", required=True, choices=["random", "lb-k1", "lb-kgeq2", "tiebreak-k1", "tiebreak-kgeq2", "query-lb"])
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--eps", default="1/1000")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--index", type=int, default=0, help="instance index within the seed's stream")
    g.add_argument("--distribution", choices=["uniform", "clustered"], default="uniform")
    g.add_argument("--distinct", action="store_true")
    g.add_argument("--two-sided", action="store_true")
    g.add_argument("--victim", type=int, help="lower-bound families: agent kept away from the a_1 slot")
    g.add_argument("--delta", help="tie-break families: spread coincident points by this rational")
    g.add_argument("--queried", help="query-lb: comma separated queried giver ids")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("run", help="run a matching algorithm")
    r.add_argument("--algo", required=True, choices=list(harness.ALGORITHMS))
    r.add_argument("--anchors", help="i,j for ordermatch-naive")
    r.add_argument("--profile")
    r.add_argument("--instance")
    r.add_argument("--k", type=int)
    r.set_defaults(func=cmd_run)

    e = sub.add_parser("eval", help="run a sweep from a key = value config file")
    e.add_argument("--config")
    e.add_argument("--csv")
    e.add_argument("--json")
    e.add_argument("--workers", type=int)
    e.set_defaults(func=cmd_eval)

    a = sub.add_parser("analyze", help="permutation graph of OrderMatch against M*")
    a.add_argument("--instance", required=True)
    a.add_argument("--algo", default="ordermatch", choices=["ordermatch"])
    a.set_defaults(func=cmd_analyze)

    t = sub.add_parser("twosided", help="two-sided optimum and query-bounded solvers")
    t.add_argument("--mode", required=True, choices=["optimal", "ranks1side", "zeroknowledge"])
    t.add_argument("--instance")
    t.add_argument("--n", type=int, default=6, help="size of a generated instance when no file is given")
    t.add_argument("--seed", type=int, default=0)
    t.set_defaults(func=cmd_twosided)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except (DomainError, InconsistentProfileError, im.ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
