"""Command-line front end.

Exit codes: 0 affirmative (successful / feasible / zero unmet), 1 negative
answer, 2 usage or input error, 3 resource limit hit. JSON or CSV payloads go
to stdout (or the requested files); diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import json
import os
import sys


from .analysis import check_success, feasibility, max_unmet_demand, star_instance
from .experiments import ExperimentConfig, backbone_graph, emit_results, run_experiment
from .model import (
    GraphFormatError,
    format_ratio,
    graph_to_dict,
    load_graph,
    parse_quantity,
    save_graph,
)
from .session import (
    EnumerationLimitError,
    enumerate_sessions,
    find_infeasible_witness,
    run_session,
    sample_sessions,
)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2
EXIT_LIMIT = 3


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _cmd_check(args) -> int:
    graph = load_graph(args.graph)
    report = check_success(graph)
    _emit(report.to_dict(graph))
    return EXIT_OK if report.successful else EXIT_NEGATIVE


def _cmd_feasible(args) -> int:
    graph = load_graph(args.graph)
    alloc = feasibility(graph)
    if alloc is None:
        _emit({"feasible": False})
        return EXIT_NEGATIVE
    _emit({"feasible": True, "allocation": alloc.to_dict()})
    return EXIT_OK


def _cmd_enumerate(args) -> int:
    graph = load_graph(args.graph)
    try:
        if args.sample:
            summary = sample_sessions(graph, args.sample, args.seed)
        else:
            summary = enumerate_sessions(graph, limit=args.limit)
    except EnumerationLimitError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_LIMIT
    _emit(summary.to_dict())
    return EXIT_OK if summary.infeasible_fraction == 0 else EXIT_NEGATIVE


def _cmd_max_unmet(args) -> int:
    graph = load_graph(args.graph)
    value, alloc = max_unmet_demand(graph)
    _emit({"max_unmet_demand": format_ratio(value), "allocation": alloc.to_dict()})
    return EXIT_OK if value == 0 else EXIT_NEGATIVE


def _cmd_witness(args) -> int:
    graph = load_graph(args.graph)
    witness = find_infeasible_witness(graph)
    if witness is None:
        _emit({"witness": None})
        return EXIT_OK
    outcome = run_session(graph, witness)
    _emit(
        {
            "witness": witness,
            "unmet": [format_ratio(u) for u in outcome.unmet],
        }
    )
    return EXIT_NEGATIVE


def _cmd_gen_star(args) -> int:
    d = parse_quantity(args.demand)
    r = parse_quantity(args.reserve)
    graph = star_instance(args.buyers, d, d + r)
    if args.output:
        save_graph(graph, args.output)
    else:
        _emit(graph_to_dict(graph))
    return EXIT_OK


def _cmd_experiment(args) -> int:
    if args.config:
        with open(args.config, "r", encoding="utf-8") as f:
            config = ExperimentConfig.from_dict(json.load(f))
    else:
        config = ExperimentConfig(base_graph=backbone_graph("default"))
    jobs = args.jobs if args.jobs else (os.cpu_count() or 1)
    rows, stats = run_experiment(config, jobs=jobs)
    os.makedirs(args.output_dir, exist_ok=True)
    written = []
    for fmt in args.formats.split(","):
        fmt = fmt.strip()
        path = os.path.join(args.output_dir, f"experiment.{fmt}")
        emit_results(rows, stats, fmt, path, config)
        written.append(path)
    by_k: dict[int, list] = {}
    for r in rows:
        by_k.setdefault(r.k, []).append(r)
    _emit(
        {
            "rows": len(rows),
            "files": written,
            "per_k": {
                str(k): {
                    "graphs": len(group),
                    "successful": sum(1 for r in group if r.successful),
                }
                for k, group in sorted(by_k.items())
            },
        }
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="exnet",
        description="Fixed-price exchange networks: order-independence, "
        "enumeration, and unmet-demand analysis on bipartite graphs.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("check", help="decide order-independence topologically")
    sp.add_argument("graph")
    sp.set_defaults(func=_cmd_check)

    sp = sub.add_parser("feasible", help="does any allocation meet all demands?")
    sp.add_argument("graph")
    sp.set_defaults(func=_cmd_feasible)

    sp = sub.add_parser("enumerate", help="exact or sampled session enumeration")
    sp.add_argument("graph")
    sp.add_argument("--sample", type=int, default=0, metavar="N",
                    help="estimate from N random orderings instead of exact counts")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--limit", type=int, default=None,
                    help="exact-enumeration link limit (default 12, env EXNET_LIMIT)")
    sp.set_defaults(func=_cmd_enumerate)

    sp = sub.add_parser("max-unmet", help="maximum unmet demand over stalled allocations")
    sp.add_argument("graph")
    sp.set_defaults(func=_cmd_max_unmet)

    sp = sub.add_parser("witness", help="find an ordering that strands demand")
    sp.add_argument("graph")
    sp.set_defaults(func=_cmd_witness)

    sp = sub.add_parser("gen-star", help="generate a hub-seller worst-case instance")
    sp.add_argument("--buyers", type=int, required=True)
    sp.add_argument("--demand", required=True, help="per-actor budget, integer or p/q")
    sp.add_argument("--reserve", default="0",
                    help="extra supply at the hub seller beyond its balanced amount")
    sp.add_argument("-o", "--output", default=None, help="write graph JSON here")
    sp.set_defaults(func=_cmd_gen_star)

    sp = sub.add_parser("experiment", help="link-addition study on the backbone")
    sp.add_argument("--config", default=None, help="experiment config JSON")
    sp.add_argument("--output-dir", default="results")
    sp.add_argument("--formats", default="csv,json")
    sp.add_argument("--jobs", type=int, default=0,
                    help="worker processes (default: available parallelism)")
    sp.set_defaults(func=_cmd_experiment)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        return args.func(args)
    except (GraphFormatError, FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
