"""Command line surface: gen, solve, heuristic, srh, check, export-lp, bench.

Exit codes: 0 success, 1 usage or parse error, 2 infeasible (including
heuristic horizon exhaustion and a failed plan check), 3 limit reached
without an incumbent.
"""

from __future__ import annotations

import argparse
import logging
import sys
from fractions import Fraction
from pathlib import Path

from .bench import METHODS, best_rule_start, format_report, run_benchmark
from .generator import PRESETS, GeneratorConfigError, generate, generate_preset
from .heuristics import RULES, HorizonExhausted, maximalize, run_priority_rule, run_srh
from .ilp import MODEL_BUILDERS, export_lp, model_stats
from .instance import (
    InstanceDataError,
    InstanceFormatError,
    format_instance,
    format_quantity,
    parse_instance,
)
from .patterns import CatalogSizeError, build_catalog
from .plan import decode, metrics, plan_from_text, plan_to_text, verify
from .solver import SolveLimits, make_bound, solve

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_NO_INCUMBENT = 3

PATTERN_MODES = {"maximal": "maximal", "all": "all-feasible", "qc-maximal": "qc-maximal"}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="beamplan", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a seeded synthetic instance")
    gen.add_argument("--preset", choices=sorted(PRESETS), default="small")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--periods", type=int, default=None,
                     help="explicit horizon instead of the preset's choice")
    gen.add_argument("-o", "--out", default=None, help="output file (default stdout)")

    def add_instance(p):
        p.add_argument("instance", help="instance file")

    def add_limits(p):
        p.add_argument("--max-nodes", type=int, default=None)
        p.add_argument("--max-seconds", type=float, default=None)
        p.add_argument("--gap", type=Fraction, default=Fraction(0),
                       help="stop at this relative optimality gap (rational)")

    def add_patterns(p):
        p.add_argument("--patterns", choices=sorted(PATTERN_MODES), default="maximal")

    solve_p = sub.add_parser("solve", help="solve one model exactly")
    add_instance(solve_p)
    solve_p.add_argument("--model", choices=sorted(MODEL_BUILDERS), default="m1")
    add_patterns(solve_p)
    solve_p.add_argument("--bound", choices=["trivial", "demand", "lp"], default="demand")
    add_limits(solve_p)
    solve_p.add_argument("--no-warm-start", action="store_true",
                         help="do not seed the search with a priority-rule plan")
    solve_p.add_argument("--plan-out", default=None)
    solve_p.add_argument("--log-every", type=int, default=0,
                         help="emit a progress line every N nodes")

    heur = sub.add_parser("heuristic", help="run one priority rule")
    add_instance(heur)
    heur.add_argument("--rule", choices=sorted(RULES), required=True)
    heur.add_argument("--phase1-only", action="store_true",
                      help="skip the maximalization phase")
    heur.add_argument("--cap-surplus", action="store_true",
                      help="maximalize without exceeding demands")
    heur.add_argument("--plan-out", default=None)

    srh_p = sub.add_parser("srh", help="size-reduction heuristic (reduced exact solve)")
    add_instance(srh_p)
    srh_p.add_argument("--model", choices=sorted(MODEL_BUILDERS), default="m1")
    add_limits(srh_p)
    srh_p.add_argument("--plan-out", default=None)

    check = sub.add_parser("check", help="verify a plan file against an instance")
    add_instance(check)
    check.add_argument("plan", help="plan file")

    export = sub.add_parser("export-lp", help="write a model in LP text format")
    add_instance(export)
    export.add_argument("--model", choices=sorted(MODEL_BUILDERS), default="m1")
    add_patterns(export)
    export.add_argument("-o", "--out", default=None, help="output file (default stdout)")

    bench = sub.add_parser("bench", help="instances x methods sweep into a report")
    bench.add_argument("instances", nargs="*", help="instance files")
    bench.add_argument("--gen", choices=sorted(PRESETS), default=None,
                       help="also generate COUNT seeded instances of this preset")
    bench.add_argument("--count", type=int, default=5)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--methods", default="m1-exact,sctsl",
                       help=f"comma list from: {', '.join(METHODS)}")
    add_patterns(bench)
    add_limits(bench)
    bench.add_argument("--out", default=None, help="report file (default stdout)")
    bench.add_argument("--plans-dir", default=None)
    return parser


def _read_instance(path: str):
    text = Path(path).read_text(encoding="utf-8")
    return parse_instance(text)


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _limits(args) -> SolveLimits:
    return SolveLimits(
        max_nodes=args.max_nodes,
        max_seconds=args.max_seconds,
        target_gap=args.gap,
    )


def _print_metrics(inst, scored) -> None:
    print(f"total_idle = {format_quantity(scored.total_idle, inst.unit_scale)}")
    print(f"makespan = {scored.makespan}")
    print(f"total_completion = {scored.total_completion}")
    print(f"surplus_total = {scored.total_surplus}")


def _cmd_gen(args) -> int:
    if args.periods is not None:
        from dataclasses import replace

        config = replace(PRESETS[args.preset], seed=args.seed, periods=args.periods)
        inst = generate(config)
    else:
        inst = generate_preset(args.preset, args.seed)
    comment = f"generated: preset={args.preset} seed={args.seed}"
    _write(args.out, format_instance(inst, comment=comment))
    return EXIT_OK


def _cmd_solve(args) -> int:
    inst = _read_instance(args.instance)
    cat = build_catalog(inst, PATTERN_MODES[args.patterns])
    model = MODEL_BUILDERS[args.model](inst, cat)
    stats = model_stats(model)
    print(f"model {args.model}: variables={stats['variables']} "
          f"constraints={stats['constraints']} nonzeros={stats['nonzeros']}")
    if args.log_every:
        logging.basicConfig(level=logging.INFO, format="%(message)s")
    initial = None
    if not args.no_warm_start:
        initial = best_rule_start(inst, cat, model, args.model)
    solution = solve(model, _limits(args), make_bound(args.bound, model, inst, cat),
                     log_interval=args.log_every, initial_values=initial)
    print(f"status = {solution.status}")
    scale = inst.unit_scale if args.model == "m1" else 1
    if solution.objective_value is not None:
        print(f"objective = {format_quantity(solution.objective_value, scale)}")
    if solution.bound is not None:
        bound = solution.bound
        bound_text = (
            format_quantity(bound, scale) if isinstance(bound, int)
            else f"{float(bound):.6f}"
        )
        print(f"bound = {bound_text}")
    print(f"nodes = {solution.stats.nodes}")
    print(f"wall_time_s = {solution.stats.wall_time:.3f}")
    if solution.status == "infeasible":
        return EXIT_INFEASIBLE
    if solution.values is None:
        return EXIT_NO_INCUMBENT
    plan = decode(model, solution, cat)
    problems = verify(inst, cat, plan)
    if problems:  # defensive: a decoded optimal plan always verifies
        for problem in problems:
            print(f"violation: {problem}", file=sys.stderr)
        return EXIT_INFEASIBLE
    _print_metrics(inst, metrics(inst, cat, plan))
    if args.plan_out:
        _write(args.plan_out, plan_to_text(plan, cat, inst,
                                           instance_label=Path(args.instance).stem))
    return EXIT_OK


def _cmd_heuristic(args) -> int:
    inst = _read_instance(args.instance)
    try:
        plan, cat = run_priority_rule(inst, RULES[args.rule])
        if not args.phase1_only:
            plan, cat = maximalize(inst, cat, plan, cap_surplus=args.cap_surplus)
    except HorizonExhausted as error:
        print(f"status = horizon-exhausted ({error})")
        return EXIT_INFEASIBLE
    print("status = ok")
    _print_metrics(inst, metrics(inst, cat, plan))
    if args.plan_out:
        _write(args.plan_out, plan_to_text(plan, cat, inst,
                                           instance_label=Path(args.instance).stem))
    return EXIT_OK


def _cmd_srh(args) -> int:
    inst = _read_instance(args.instance)
    result = run_srh(inst, args.model, _limits(args))
    print(f"status = {result.status}")
    print(f"patterns = {result.catalog.size}")
    scale = inst.unit_scale if args.model == "m1" else 1
    if result.solution.objective_value is not None:
        print(f"objective = {format_quantity(result.solution.objective_value, scale)}")
    print(f"nodes = {result.solution.stats.nodes}")
    if result.status == "infeasible-reduced":
        return EXIT_INFEASIBLE
    if result.plan is None:
        return EXIT_NO_INCUMBENT
    _print_metrics(inst, metrics(inst, result.catalog, result.plan))
    if args.plan_out:
        _write(args.plan_out, plan_to_text(result.plan, result.catalog, inst,
                                           instance_label=Path(args.instance).stem))
    return EXIT_OK


def _cmd_check(args) -> int:
    inst = _read_instance(args.instance)
    plan, cat = plan_from_text(Path(args.plan).read_text(encoding="utf-8"), inst)
    problems = verify(inst, cat, plan)
    if problems:
        for problem in problems:
            print(f"violation: {problem}")
        return EXIT_INFEASIBLE
    print("plan verifies")
    _print_metrics(inst, metrics(inst, cat, plan))
    return EXIT_OK


def _cmd_export_lp(args) -> int:
    inst = _read_instance(args.instance)
    cat = build_catalog(inst, PATTERN_MODES[args.patterns])
    model = MODEL_BUILDERS[args.model](inst, cat)
    _write(args.out, export_lp(model))
    return EXIT_OK


def _cmd_bench(args) -> int:
    suite = []
    for path in args.instances:
        suite.append((Path(path).stem, _read_instance(path)))
    if args.gen is not None:
        for index in range(args.count):
            seed = args.seed + index
            suite.append((f"{args.gen}-{seed}", generate_preset(args.gen, seed)))
    if not suite:
        raise _UsageError("bench needs instance files and/or --gen")
    methods = [m for m in (part.strip() for part in args.methods.split(",")) if m]
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise _UsageError(f"unknown methods: {', '.join(unknown)}")
    rows = run_benchmark(
        suite, methods, _limits(args), plans_dir=args.plans_dir,
        patterns_mode=PATTERN_MODES[args.patterns],
    )
    meta = {
        "generator": args.gen or "files",
        "seed": args.seed,
        "methods": ";".join(methods),
        "patterns": args.patterns,
        "max_nodes": args.max_nodes,
        "max_seconds": args.max_seconds,
    }
    _write(args.out, format_report(rows, meta))
    return EXIT_OK


_COMMANDS = {
    "gen": _cmd_gen,
    "solve": _cmd_solve,
    "heuristic": _cmd_heuristic,
    "srh": _cmd_srh,
    "check": _cmd_check,
    "export-lp": _cmd_export_lp,
    "bench": _cmd_bench,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as error:
        print(f"error: {error}", file=sys.stderr)
        return EXIT_USAGE
    except (InstanceFormatError, InstanceDataError, GeneratorConfigError,
            CatalogSizeError, OSError, ValueError) as error:
        print(f"error: {error}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
