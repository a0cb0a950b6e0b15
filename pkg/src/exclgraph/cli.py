"""Command-line front end.

Exit codes: 0 on success, 2 for bad arguments, 1 when a computation fails.
Every number printed here comes straight from a library call.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .catalog import catalog_names, resolve_inequality, support_graph
from .classical import alpha, best_strategy
from .graph import ExclusivityGraph, build_graph, colored_layers, cycle_graph, dump_json, export_dot
from .quantum import lovasz_theta, seesaw_lower_bound
from .reports import ReportBundle, fmt, table1_rows, to_csv
from .scenario import ScenarioError, estimate_iv_strength, parse_scenario, synthetic_iv_samples
from .structure import (
    appearances_csv,
    family_grid,
    find_odd_antiholes,
    find_odd_holes,
    scan_family,
)


class _ArgError(Exception):
    """Raised for inputs that parse but do not make sense together."""


def _scenario_arg(text: str):
    try:
        if text.endswith(".json") and os.path.isfile(text):
            with open(text, encoding="utf-8") as fh:
                text = fh.read()
        return parse_scenario(text)
    except (ScenarioError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _ineq_arg(text: str):
    try:
        return resolve_inequality(text)
    except (KeyError, ValueError, OSError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--json", metavar="FILE", help="write a JSON report bundle ('-' for stdout)")
    p.add_argument("--csv", metavar="FILE", help="write a CSV table ('-' for stdout)")
    p.add_argument("--threads", type=_positive, default=1, help="worker count (default 1)")
    return p


def _graph_source(p: argparse.ArgumentParser, cycle: bool = True) -> None:
    p.add_argument("--scenario", type=_scenario_arg, help="scenario shorthand, JSON text or JSON file")
    p.add_argument("--ineq", type=_ineq_arg,
                   help="inequality: catalog name, cglmp_s:d,k, cglmp:d, pearl:l,m,n:i or a JSON file")
    if cycle:
        p.add_argument("--cycle", type=int, metavar="N", help="use the cycle graph C_N with unit weights")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="exclgraph", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"exclgraph {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("graph", parents=[common], help="build an exclusivity graph")
    _graph_source(p, cycle=False)
    p.add_argument("--strategy", choices=["pairwise", "bfs"], default="pairwise")
    p.add_argument("--dot", metavar="FILE", help="write Graphviz DOT ('-' for stdout)")
    p.add_argument("--colored", action="store_true", help="export the per-variable layers")

    p = sub.add_parser("alpha", parents=[common], help="weighted independence number (classical bound)")
    _graph_source(p)
    p.add_argument("--oracle", action="store_true", help="also maximise over deterministic strategies")

    p = sub.add_parser("theta", parents=[common], help="Lovasz theta number (quantum upper bound)")
    _graph_source(p)

    p = sub.add_parser("seesaw", parents=[common], help="see-saw quantum lower bound")
    p.add_argument("--ineq", type=_ineq_arg, required=True)
    p.add_argument("--seed", type=int, required=True, help="master seed (mandatory)")
    p.add_argument("--dims", type=_int_list, default=(2, 2), help="local dimensions (default 2,2)")
    p.add_argument("--restarts", type=_positive, default=50, help="restart count (default 50)")
    p.add_argument("--field", choices=["real", "complex"], default="real", help="default real")
    p.add_argument("--max-sweeps", type=_positive, default=500, help="default 500")
    p.add_argument("--dump-strategy", metavar="FILE", help="write the best strategy as JSON")

    p = sub.add_parser("scan", parents=[common], help="odd holes of one graph or first appearances on a grid")
    p.add_argument("--scenario", type=_scenario_arg, help="search one scenario's full graph")
    p.add_argument("--max-len", type=int, default=11, help="longest cycle searched (default 11)")
    p.add_argument("--antiholes", action="store_true", help="also search the complement")
    p.add_argument("--grid", type=_int_list, metavar="L,M[,N]", help="instrumental grid maxima")
    p.add_argument("--n-equals-m", action="store_true", help="tie n to m on the grid")
    p.add_argument("--lengths", type=_int_list, default=(5, 7, 9, 11), help="default 5,7,9,11")

    p = sub.add_parser("catalog", parents=[common], help="list or show inequalities")
    p.add_argument("name", nargs="?", type=_ineq_arg)

    p = sub.add_parser("table1", parents=[common], help="alpha/theta table for the CGLMP blocks S^d_k")
    p.add_argument("--max-d", type=int, default=5, help="largest d (default 5)")
    p.add_argument("--seesaw", action="store_true", help="add a see-saw column (needs --seed)")
    p.add_argument("--seed", type=int, help="see-saw master seed")
    p.add_argument("--restarts", type=_positive, default=20, help="see-saw restarts (default 20)")

    p = sub.add_parser("iv-estimate", parents=[common], help="covariance-ratio instrument strength")
    p.add_argument("--input", metavar="FILE", help="CSV with columns x,a,b (header optional)")
    p.add_argument("--gamma", type=float, help="draw synthetic data with this true effect")
    p.add_argument("--samples", type=_positive, default=100_000, help="synthetic sample count")
    p.add_argument("--seed", type=int, help="seed for synthetic data")
    return parser


# -- commands ----------------------------------------------------------------


def _graph_for(args) -> tuple[ExclusivityGraph, str | None]:
    if getattr(args, "cycle", None) is not None:
        if args.cycle < 3:
            raise _ArgError("--cycle needs N >= 3")
        return cycle_graph(args.cycle), None
    if args.ineq is not None:
        if args.scenario is not None and args.scenario != args.ineq.scenario:
            raise _ArgError("--ineq is defined on a different scenario than --scenario")
        return support_graph(args.ineq), args.ineq.scenario.serialize()
    if args.scenario is not None:
        return build_graph(args.scenario), args.scenario.serialize()
    raise _ArgError("give --scenario, --ineq or --cycle")


def cmd_graph(args, out):
    if args.ineq is not None:
        s, events, weights = args.ineq.scenario, args.ineq.events, args.ineq.weights
    elif args.scenario is not None:
        s, events, weights = args.scenario, None, None
    else:
        raise _ArgError("give --scenario or --ineq")
    g = build_graph(s, events, weights, strategy=args.strategy)
    view = colored_layers(s, g) if args.colored else g
    if args.dot:
        _write(args.dot, export_dot(view))
    out(f"vertices {g.n}\nedges {len(g.edges())}")
    return s.serialize(), {"graph": json.loads(dump_json(view))}, None


def cmd_alpha(args, out):
    g, scen = _graph_for(args)
    res = alpha(g)
    results = {"alpha": res.value, "witness": [g.labels[i] for i in res.vertices]}
    out(fmt(res.value))
    if args.oracle:
        if args.ineq is None:
            raise _ArgError("--oracle needs --ineq")
        value, _ = best_strategy(args.ineq, workers=args.threads)
        results["oracle"] = value
        out(f"oracle {fmt(value)}")
    rows = [("alpha", res.value)] + ([("oracle", results["oracle"])] if args.oracle else [])
    return scen, results, (("quantity", "value"), rows)


def cmd_theta(args, out):
    g, scen = _graph_for(args)
    res = lovasz_theta(g)
    out(f"{res.value:.7f}")
    return scen, {"theta": res.value}, (("quantity", "value"), [("theta", res.value)])


def cmd_seesaw(args, out):
    if len(args.dims) != 2:
        raise _ArgError("--dims needs two values")
    res = seesaw_lower_bound(
        args.ineq, dims=args.dims, restarts=args.restarts, seed=args.seed,
        max_sweeps=args.max_sweeps, field_=args.field, workers=args.threads,
    )
    if args.dump_strategy:
        _write(args.dump_strategy, json.dumps(res.strategy.to_json(), indent=1) + "\n")
    out(f"{res.value:.7f}")
    results = {
        "value": res.value,
        "best_restart": res.best_restart,
        "restarts": [{"index": r.index, "seed": r.seed, "value": r.value, "sweeps": r.sweeps} for r in res.restarts],
    }
    rows = [(r.index, r.seed, r.value, r.sweeps) for r in res.restarts]
    return args.ineq.scenario.serialize(), results, (("restart", "seed", "value", "sweeps"), rows)


def cmd_scan(args, out):
    if args.grid is not None:
        if len(args.grid) not in (2, 3):
            raise _ArgError("--grid needs L,M or L,M,N")
        pts = family_grid(args.grid[0], args.grid[1], args.grid[2] if len(args.grid) == 3 else None,
                          n_equals_m=args.n_equals_m)
        rows = scan_family(pts, args.lengths, workers=args.threads)
        text = appearances_csv(rows)
        out(text.rstrip("\n"))
        results = [{"cycle_length": r.length, "point": list(r.point) if r.point else None,
                    "witness_vertices": list(r.witness)} for r in rows]
        csv_rows = [(r.length, *(r.point or ("", "", "")), " ".join(r.witness)) for r in rows]
        return None, results, (("cycle_length", "l", "m", "n", "witness_vertices"), csv_rows)
    if args.scenario is None:
        raise _ArgError("give --scenario or --grid")
    g = build_graph(args.scenario)
    reports = {"hole": find_odd_holes(g, args.max_len, workers=args.threads)}
    if args.antiholes:
        reports["antihole"] = find_odd_antiholes(g, args.max_len, workers=args.threads)
    results, rows = {}, []
    for kind, rep in reports.items():
        results[kind] = {
            "max_len": rep.max_len,
            "exhaustive": rep.exhaustive,
            "count": len(rep.holes),
            "lengths": sorted(rep.lengths()),
            "cycles": [[g.labels[i] for i in h.vertices] for h in rep.holes],
        }
        for L in sorted(rep.lengths()):
            n = sum(1 for h in rep.holes if h.length == L)
            rows.append((kind, L, n))
            out(f"{kind} length {L}: {n}")
        if not rep.holes:
            out(f"no odd {kind}s up to length {rep.max_len}")
    return args.scenario.serialize(), results, (("kind", "length", "count"), rows)


def cmd_catalog(args, out):
    if args.name is None:
        for n in catalog_names():
            out(n)
        return None, {"names": catalog_names()}, (("name",), [(n,) for n in catalog_names()])
    ineq = args.name
    out(ineq.describe())
    if ineq.ceiling is not None:
        out(f"ceiling {fmt(ineq.ceiling)} ({ineq.ceiling_note})")
    rows = [(ineq.scenario.event_label(e), w) for e, w in ineq.terms]
    return ineq.scenario.serialize(), ineq.to_json(), (("event", "weight"), rows)


def cmd_table1(args, out):
    if args.seesaw and args.seed is None:
        raise _ArgError("--seesaw needs --seed")
    if args.max_d < 3:
        raise _ArgError("--max-d must be >= 3")
    rows = table1_rows(args.max_d, args.seesaw, args.seed or 0, args.restarts, args.threads)
    header = ["d", "k", "alpha", "theta"] + (["seesaw"] if args.seesaw else [])
    table = [[r[h] for h in header] for r in rows]
    if not args.csv:
        out(to_csv(header, table).rstrip("\n"))
    return "bell:2,2,d,d", rows, (header, table)


def cmd_iv(args, out):
    if (args.input is None) == (args.gamma is None):
        raise _ArgError("give exactly one of --input or --gamma")
    if args.input is not None:
        data = np.genfromtxt(args.input, delimiter=",", names=None, dtype=float)
        data = data[~np.isnan(data).any(axis=1)] if data.ndim == 2 else data
    else:
        if args.seed is None:
            raise _ArgError("--gamma needs --seed")
        data = synthetic_iv_samples(args.gamma, args.samples, args.seed)
    gamma = estimate_iv_strength(data)
    out(f"{gamma:.7f}")
    return "instrumental", {"gamma": gamma, "samples": int(len(data))}, (("quantity", "value"), [("gamma", gamma)])


COMMANDS: dict[str, Callable] = {
    "graph": cmd_graph,
    "alpha": cmd_alpha,
    "theta": cmd_theta,
    "seesaw": cmd_seesaw,
    "scan": cmd_scan,
    "catalog": cmd_catalog,
    "table1": cmd_table1,
    "iv-estimate": cmd_iv,
}


def _write(dest: str, text: str) -> None:
    if dest == "-":
        sys.stdout.write(text)
    else:
        with open(dest, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    quiet = "-" in (args.json, args.csv, getattr(args, "dot", None))
    out = (lambda _t: None) if quiet else print
    t0 = time.perf_counter()
    try:
        scenario, results, table = COMMANDS[args.command](args, out)
    except _ArgError as exc:
        print(f"exclgraph {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # computation failures
        print(f"exclgraph {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    wall = time.perf_counter() - t0
    if args.json:
        bundle = ReportBundle(argv, results, scenario, getattr(args, "seed", None), wall)
        _write(args.json, bundle.to_json())
    if args.csv and table is not None:
        _write(args.csv, to_csv(*table))
    return 0


if __name__ == "__main__":
    sys.exit(main())
