"""Command-line front end.

Exit codes: 0 success (or a "yes" verdict), 1 a "no" verdict from ``check``
and ``exists``, 2 usage errors, 3 validation or budget errors, 4
non-convergence. Cardinalities are positional integers; distributions are
read from JSON files.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from collections import Counter
from pathlib import Path

import numpy as np

from . import approx, interactions, maximizers, poset, probspace
from .errors import BudgetError, ConvergenceError, MultiInfoError
from .probspace import Distribution, ProductSpace

EXIT_NO = 1
EXIT_INVALID = 3
EXIT_NONCONVERGED = 4


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        Path(args.out).write_text(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _load_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise MultiInfoError(f"cannot read {path}: {exc}") from exc


def _load_distribution(path: str) -> Distribution:
    return Distribution.from_dict(_load_json(path))


def _dist_lines(p: Distribution) -> list[str]:
    # 1-based labels for people
    lines = []
    for k in p.support():
        cfg = ",".join(str(w + 1) for w in p.space.decode(int(k)))
        lines.append(f"  ({cfg})  {p.probs[k]}")
    return lines


# -- verbs -------------------------------------------------------------------

def cmd_info(args) -> int:
    p = _load_distribution(args.file)
    hs = [probspace.entropy_of(p, [i]) for i in range(p.space.n_units)]
    H = probspace.entropy(p)
    I = probspace.multi_information(p)
    bound = probspace.upper_bound(p.space)
    data = {"cards": list(p.space.cards), "marginal_entropies": hs, "entropy": H,
            "multi_information": I, "bound": bound, "gap": bound - I}
    if args.json:
        _emit(args, json.dumps(data))
    else:
        lines = [f"H_{i + 1} = {_fmt(h)}" for i, h in enumerate(hs)]
        lines += [f"H = {_fmt(H)}", f"I = {_fmt(I)}", f"bound = {_fmt(bound)}", f"gap = {_fmt(bound - I)}"]
        _emit(args, "\n".join(lines))
    return 0


def cmd_nmin(args) -> int:
    cards = args.cards
    value = maximizers.n_min(cards)
    T = maximizers.build_tset(cards)
    bounds = maximizers.n_min_bounds(cards)
    if args.json:
        _emit(args, json.dumps({"n_min": value, "T": [str(x) for x in T.points], "bounds": bounds}))
    else:
        _emit(args, f"n_min = {value}; T = {T}\n"
                    f"bounds: max = {bounds['max']}, 1+sum(n_i-1) = {bounds['coprime']}, LCM = {bounds['lcm']}")
    return 0


def cmd_construct(args) -> int:
    p = maximizers.construct_maximizer(ProductSpace(tuple(args.cards)))
    _emit(args, p.to_json())
    return 0


def cmd_check(args) -> int:
    p = _load_distribution(args.file)
    w = maximizers.find_witness(p, tol=args.tol)
    if args.json:
        _emit(args, json.dumps({"maximizer": w is not None, "witness": w.to_dict() if w else None}))
    else:
        if w is None:
            _emit(args, "maximizer: no")
        else:
            _emit(args, "maximizer: yes\nwitness: " + w.to_json())
    return 0 if w is not None else EXIT_NO


def cmd_exists(args) -> int:
    space = ProductSpace(tuple(args.cards))
    w = maximizers.find_maximizer_exhaustive(space)
    rule = maximizers.maximizer_exists(space)
    if args.json:
        _emit(args, json.dumps({"exists": w is not None, "threshold_rule": rule,
                                "witness": w.to_dict() if w else None}))
    else:
        _emit(args, f"exists: {'yes' if w else 'no'} (threshold rule: {'yes' if rule else 'no'})")
    return 0 if w is not None else EXIT_NO


def cmd_enumerate(args) -> int:
    ps = maximizers.enumerate_equal_unit_maximizers(args.n, args.N, cap=args.cap)
    if args.json:
        _emit(args, json.dumps([p.to_dict() for p in ps]))
    else:
        lines = [f"{len(ps)} maximizers"]
        for k, p in enumerate(ps):
            lines.append(f"#{k}")
            lines.extend(_dist_lines(p))
        _emit(args, "\n".join(lines))
    return 0


def cmd_poset(args) -> int:
    g = poset.cover_graph(args.n1, args.n2)
    counts = dict(sorted(Counter(poset.stratum_dim(pi) for pi in g.nodes).items()))
    connected = g.is_connected()
    if args.edges:
        Path(args.edges).write_text(g.to_edge_list())
    if args.dot:
        Path(args.dot).write_text(g.to_dot())
    if args.json:
        _emit(args, json.dumps({"maps": len(g.nodes), "dims": {str(k): v for k, v in counts.items()},
                                "connected": connected, "nodes": g.node_table(),
                                "edges": [list(e) for e in g.edges]}))
    else:
        dims = ", ".join(f"{k}:{v}" for k, v in counts.items())
        lines = [f"{len(g.nodes)} maps; dims {{{dims}}}; connected: {'yes' if connected else 'no'}"]
        if args.table:
            for k, pi in enumerate(g.nodes):
                lines.append(f"  {k:4d}  {pi}  dim={poset.stratum_dim(pi)}")
        _emit(args, "\n".join(lines))
    return 0


def _load_function(path: str) -> interactions.RealFunction:
    data = _load_json(path)
    if "values" in data:
        return interactions.RealFunction(ProductSpace(tuple(data["cards"])), np.array(data["values"], dtype=float))
    return interactions.RealFunction.log_of(Distribution.from_dict(data))


def cmd_decompose(args) -> int:
    f = _load_function(args.file)
    n = f.space.n_units
    rows = []
    for r in range(n + 1):
        for A in itertools.combinations(range(n), r):
            rows.append((A, interactions.project_onto_pure_IA(f, A).norm()))
    if args.json:
        _emit(args, json.dumps([{"set": [i + 1 for i in A], "norm": v} for A, v in rows]))
    else:
        lines = ["set\tnorm"]
        lines += ["{" + ",".join(str(i + 1) for i in A) + "}\t" + _fmt(v) for A, v in rows]
        _emit(args, "\n".join(lines))
    return 0


def _family(args, space: ProductSpace) -> interactions.InteractionFamilySpec:
    fam = args.family
    if fam == "star":
        hub = None if args.hub is None else args.hub - 1
        return interactions.InteractionFamilySpec.star(space, hub)
    if fam == "factorizable":
        return interactions.InteractionFamilySpec.factorizable(space)
    if fam.startswith("order:"):
        return interactions.InteractionFamilySpec.of_order(space, int(fam.split(":", 1)[1]))
    if fam.startswith("pure:"):
        return interactions.InteractionFamilySpec.pure_order(space, int(fam.split(":", 1)[1]))
    spec = interactions.InteractionFamilySpec.from_dict(_load_json(fam))
    if spec.space != space:
        raise MultiInfoError("family file and distribution have different cards")
    return spec


def cmd_project(args) -> int:
    p = _load_distribution(args.file)
    spec = _family(args, p.space)
    r = interactions.fit_family(p, spec, tol=args.tol, max_iter=args.max_iter)
    if args.json:
        _emit(args, json.dumps({"divergence": r.divergence, "residual": r.residual,
                                "iterations": r.iterations, "dim": interactions.family_dim(spec),
                                "q": r.distribution.to_dict()}))
    else:
        _emit(args, f"D = {_fmt(r.divergence)}\nresidual = {r.residual:.3e}\n"
                    f"iterations = {r.iterations}\nfamily dim = {interactions.family_dim(spec)}")
    return 0


def cmd_approximate(args) -> int:
    p = _load_distribution(args.file)
    if args.schedule:
        args.schedule = [int(x) if float(x).is_integer() else x for x in args.schedule]
    if args.method == "pair":
        sched = args.schedule or list(approx.DEFAULT_M_SCHEDULE)
        trace = approx.pair_sequence_trace(p, sched)
    else:
        sched = args.schedule or list(approx.DEFAULT_BETA_SCHEDULE)
        phi = approx.make_general_position(p.space, seed=args.seed)
        trace = approx.quadratic_trace(p, phi, sched)
    if args.json:
        _emit(args, json.dumps({"schedule": trace.schedule, "kl": trace.kl, "residual": trace.residual}))
    else:
        _emit(args, trace.to_csv())
    if args.threshold is not None and not trace.final < args.threshold:
        sys.stderr.write(f"final divergence {trace.final:.3e} is not below {args.threshold:.1e}\n")
        return EXIT_NONCONVERGED
    return 0


def cmd_search(args) -> int:
    space = ProductSpace(tuple(args.cards))
    p, value = approx.search_local_maximizer(space, seed=args.seed, iters=args.iters, restarts=args.restarts)
    bound = probspace.upper_bound(space)
    if args.json:
        _emit(args, json.dumps({"I": value, "bound": bound, "distribution": p.to_dict()}))
    else:
        _emit(args, f"I = {_fmt(value)}\nbound = {_fmt(bound)}\n" + json.dumps(p.to_dict()))
    return 0


def cmd_report(args) -> int:
    space = ProductSpace(tuple(args.cards))
    space.require_system()
    cards = sorted(space.cards)
    dim_F = interactions.family_dim(interactions.InteractionFamilySpec.factorizable(space))
    dim_star = interactions.family_dim(interactions.InteractionFamilySpec.star(space))
    dim_pairs = interactions.family_dim(interactions.InteractionFamilySpec.of_order(space, 2))
    row = {
        "dim F": dim_F,
        "dim F* (pure pair star)": dim_star,
        "dim I^(2) family": dim_pairs,
        "dim simplex": space.total - 1,
        "3*sum(n_i-1)+2": 3 * sum(c - 1 for c in space.cards) + 2,
    }
    if len(set(cards)) == 1:
        row["(n^2+3n)/2"] = approx.quadratic_family_dim_bound(cards[0])
    row["n_min"] = maximizers.n_min(cards[:-1])
    row["maximizer exists"] = maximizers.maximizer_exists(space)
    row["max I"] = probspace.upper_bound(space)
    if args.json:
        _emit(args, json.dumps(row))
    else:
        width = max(len(k) for k in row)
        _emit(args, "\n".join(f"{k.ljust(width)}  {v}" for k, v in row.items()))
    return 0


# -- parser ------------------------------------------------------------------

def _cards(parser, name="cards", nargs="+", help="unit cardinalities"):
    parser.add_argument(name, type=int, nargs=nargs, help=help)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--out", help="write the main output to this file")

    ap = argparse.ArgumentParser(prog="multiinfo", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("info", parents=[common], help="entropies and multi-information of a distribution")
    p.add_argument("file")
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("nmin", parents=[common], help="existence threshold for the hub size")
    _cards(p, help="cardinalities of the non-hub units")
    p.set_defaults(func=cmd_nmin)

    p = sub.add_parser("construct", parents=[common], help="build a maximizer (rational JSON)")
    _cards(p)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("check", parents=[common], help="is the distribution a global maximizer?")
    p.add_argument("file")
    p.add_argument("--tol", type=float, default=maximizers.DEFAULT_TOL)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("exists", parents=[common], help="exhaustive existence oracle")
    _cards(p)
    p.set_defaults(func=cmd_exists)

    p = sub.add_parser("enumerate", parents=[common], help="all maximizers for N equal units")
    p.add_argument("n", type=int)
    p.add_argument("N", type=int)
    p.add_argument("--cap", type=int, default=maximizers.ENUMERATION_CAP)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("poset", parents=[common], help="stratification of the two-unit maximizer set")
    p.add_argument("n1", type=int)
    p.add_argument("n2", type=int)
    p.add_argument("--edges", help="write the cover graph edge list here")
    p.add_argument("--dot", help="write a DOT rendering here")
    p.add_argument("--table", action="store_true", help="list every stratum")
    p.set_defaults(func=cmd_poset)

    p = sub.add_parser("decompose", parents=[common], help="pure interaction norms of a function or ln p")
    p.add_argument("file")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("project", parents=[common], help="information projection onto a family")
    p.add_argument("file")
    p.add_argument("--family", default="star",
                   help="star | factorizable | order:K | pure:K | path to a family JSON")
    p.add_argument("--hub", type=int, help="1-based hub unit for the star family")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=10_000)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("approximate", parents=[common], help="approximating sequence trace (CSV)")
    p.add_argument("file")
    p.add_argument("--method", choices=["pair", "quadratic"], default="pair")
    p.add_argument("--schedule", type=float, nargs="+")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=float, help="exit 4 unless the last divergence is below this")
    p.set_defaults(func=cmd_approximate)

    p = sub.add_parser("search", parents=[common], help="heuristic maximizer search")
    _cards(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--iters", type=int, default=2000)
    p.add_argument("--restarts", type=int, default=20)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("report", parents=[common], help="dimension summary")
    _cards(p)
    p.set_defaults(func=cmd_report)
    return ap


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConvergenceError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NONCONVERGED
    except (MultiInfoError, BudgetError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
