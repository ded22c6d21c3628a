"""Command-line workbench: analyze, solve, budget, experiment, validate.

Human-readable output goes to stderr; machine records go to stdout or
files, so pipelines never parse prose. Exit codes: 0 success, 2 usage or
config error, 3 infeasible, 4 solver timeout (1 for a failed validation).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from .exact import (
    NodeBudgetExceeded,
    OracleLimitError,
    brute_force_oracle,
    max_coverage_under_budget,
    min_cover,
    min_factor,
)
from .graphs import GraphH, GraphParseError, analyze, graph_from_spec, parse_graph
from .heuristic import divide_conquer_factor, greedy_partial_factor
from .instances import parse_distribution, sample_instance
from .experiments import ExperimentConfig, render_records, run_experiment, write_run
from .solutions import (
    COVER,
    FACTOR,
    Infeasible,
    format_float,
    parse_solution_record,
    render_solution_record,
    validate_solution,
)
from .theory import cover_lower_exponent, predicted_exponent

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_TIMEOUT = 4


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


def _add_graph_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--named", help="named pattern spec, e.g. complete:3 or complete:4+complete:2")
    g.add_argument("--file", help="edge-list file for the pattern")


def _load_graph(args) -> GraphH:
    if args.named:
        return graph_from_spec(args.named)
    with open(args.file, "r", encoding="utf-8") as fh:
        return parse_graph(fh.read(), label=os.path.basename(args.file))


def _add_instance_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, required=True, help="host vertex count")
    p.add_argument("--seed", type=int, default=0, help="instance seed")
    p.add_argument(
        "--dist",
        default="exponential",
        help="edge weight distribution: exponential[:rate] or uniform",
    )


def cmd_analyze(args) -> int:
    h = _load_graph(args)
    rep = analyze(h)
    rows = [
        ("pattern", h.label),
        ("vertices", str(rep.v_h)),
        ("edges", str(rep.e_h)),
        ("d_H", str(rep.d_h)),
        ("d_star", str(rep.d_star)),
        ("Delta", str(rep.delta)),
        ("H_star_vertices", " ".join(map(str, rep.h_star_vertices))),
        ("Delta_witness", " ".join(map(str, rep.delta_witness_vertices))),
        ("balanced", "true" if rep.balanced else "false"),
        ("strictly_balanced", "true" if rep.strictly_balanced else "false"),
        ("automorphisms", str(rep.aut_count)),
        ("factor_exponent", repr(predicted_exponent(rep))),
        ("cover_lower_exponent", repr(cover_lower_exponent(rep))),
    ]
    width = max(len(k) for k, _ in rows)
    for key, value in rows:
        print(f"{key:<{width}}  {value}")
    return EXIT_OK


def cmd_solve(args) -> int:
    h = _load_graph(args)
    dist = parse_distribution(args.dist)
    inst = sample_instance(args.n, dist, args.seed)
    cap = float(args.cap)
    if args.solver == "oracle":
        sol = brute_force_oracle(inst, h, args.mode, args.k, cap=cap)
    elif args.solver == "heuristic":
        if args.mode != FACTOR:
            raise ValueError("the heuristic solver only handles factor mode")
        if args.k == 0 and args.n % h.vertex_count == 0 and cap == math.inf:
            diagnostics: list[dict] = []
            sol = divide_conquer_factor(inst, h, diagnostics=diagnostics)
            for level in diagnostics:
                _say(
                    "level={level} active={active} target={target_uncovered} "
                    "copies={copies_placed} weight={level_weight:.6g}".format(**level)
                )
        else:
            sol = greedy_partial_factor(inst, h, range(args.n), args.k, cap)
    else:
        fn = min_factor if args.mode == FACTOR else min_cover
        sol = fn(inst, h, args.k, cap, node_budget=args.node_budget)
    if isinstance(sol, Infeasible):
        _say("infeasible")
        return EXIT_INFEASIBLE
    sys.stdout.write(render_solution_record(sol))
    if args.solver == "exact" and not sol.optimal:
        _say("node budget exhausted; best incumbent shown (not proven optimal)")
        return EXIT_TIMEOUT
    return EXIT_OK


def cmd_budget(args) -> int:
    h = _load_graph(args)
    dist = parse_distribution(args.dist)
    inst = sample_instance(args.n, dist, args.seed)
    result = max_coverage_under_budget(
        inst, h, float(args.budget), node_budget=args.node_budget
    )
    print(
        f"budget covered={result.covered}"
        f" budget={format_float(result.budget)}"
        f" weight={format_float(result.solution.total_weight)}"
    )
    sys.stdout.write(render_solution_record(result.solution))
    if not result.solution.optimal:
        _say("node budget exhausted during the dual search")
        return EXIT_TIMEOUT
    return EXIT_OK


def cmd_experiment(args) -> int:
    cfg = ExperimentConfig.from_json(args.config)
    if args.threads is not None:
        cfg.threads = args.threads
    out_dir = args.out or os.environ.get("TILEKIT_OUT") or "tilekit-out"
    sink: list = []
    try:
        result = run_experiment(cfg, sink=sink)
    except KeyboardInterrupt:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, "records.jsonl")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps({"config": cfg.resolved()}, sort_keys=True) + "\n")
            for rec in sink:
                fh.write(json.dumps(rec.payload(), sort_keys=True) + "\n")
            fh.write(json.dumps({"truncated": True}) + "\n")
        _say(f"interrupted; partial records flushed to {path}")
        return 130
    records_path, summary_path = write_run(result, out_dir)
    _say(f"wrote {len(result.records)} records to {records_path}")
    _say(f"wrote summary to {summary_path}")
    if result.summary is not None and result.summary.slope is not None:
        _say(
            f"fitted slope {result.summary.slope:.4f}"
            f" (stderr {result.summary.stderr:.4f},"
            f" predicted {result.summary.predicted})"
        )
    if result.checks is not None:
        _say(f"checks: {json.dumps(result.checks, sort_keys=True, default=str)}")
        if not result.checks.get("all_hold", True):
            _say("WARNING: a surely-true check failed; see records")
    return EXIT_OK


def cmd_validate(args) -> int:
    h = _load_graph(args)
    dist = parse_distribution(args.dist)
    inst = sample_instance(args.n, dist, args.seed)
    if args.record == "-":
        text = sys.stdin.read()
    else:
        with open(args.record, "r", encoding="utf-8") as fh:
            text = fh.read()
    sol = parse_solution_record(text, h, inst)
    problems = validate_solution(sol, h, inst)
    if problems:
        for p in problems:
            _say(f"violation: {p}")
        return 1
    _say(
        f"valid {sol.mode} solution: {len(sol.copies)} copies,"
        f" weight {format_float(sol.total_weight)}, uncovered {sol.uncovered}"
    )
    print("valid")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tilekit",
        description="minimum-weight pattern factors and covers of randomly weighted complete graphs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="density invariants of a pattern graph")
    _add_graph_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("solve", help="solve one factor/cover instance")
    _add_graph_flags(p)
    _add_instance_flags(p)
    p.add_argument("--mode", choices=[FACTOR, COVER], default=FACTOR)
    p.add_argument("--k", type=int, default=0, help="allowed uncovered vertices")
    p.add_argument("--cap", default="inf", help="per-edge weight cap")
    p.add_argument("--solver", choices=["exact", "heuristic", "oracle"], default="exact")
    p.add_argument("--node-budget", type=int, default=None)
    p.set_defaults(func=cmd_solve, node_budget=None)

    p = sub.add_parser("budget", help="max coverage under a total weight budget")
    _add_graph_flags(p)
    _add_instance_flags(p)
    p.add_argument("--budget", required=True, help="total weight budget (inf allowed)")
    p.add_argument("--node-budget", type=int, default=None)
    p.set_defaults(func=cmd_budget)

    p = sub.add_parser("experiment", help="run a configured Monte Carlo experiment")
    p.add_argument("config", help="JSON config file (see ExperimentConfig)")
    p.add_argument("--out", default=None, help="output directory (or $TILEKIT_OUT)")
    p.add_argument("--threads", type=int, default=None, help="parallel worker cap")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("validate", help="re-check a solution record against its instance")
    _add_graph_flags(p)
    _add_instance_flags(p)
    p.add_argument("--record", required=True, help="solution record file, or - for stdin")
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "node_budget", None) is None and hasattr(args, "node_budget"):
        from .exact import DEFAULT_NODE_BUDGET

        args.node_budget = DEFAULT_NODE_BUDGET
    try:
        return args.func(args)
    except NodeBudgetExceeded as exc:
        _say(f"solver timeout: {exc}")
        return EXIT_TIMEOUT
    except (GraphParseError, OracleLimitError) as exc:
        _say(f"error: {exc}")
        return EXIT_USAGE
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        _say(f"error: {exc}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
