"""Benchmark sweeps: instances x methods into a fixed-schema report table.

Methods are the exact solves (over a chosen catalog, warm-started from the
best priority-rule plan), the six priority rules, and the size-reduction
heuristic per model.  Every plan is verified before its metrics are
recorded; per-cell failures land in the status column and never abort the
sweep.  Column schema is documented in docs/formats.md.
"""

from __future__ import annotations

import time
from pathlib import Path

from .heuristics import RULES, HorizonExhausted, run_rule, run_srh
from .ilp import MODEL_BUILDERS
from .instance import Instance, format_quantity
from .patterns import build_catalog
from .plan import compact, decode, encode, metrics, plan_to_text, verify
from .solver import SolveLimits, make_bound, solve

REPORT_COLUMNS = (
    "instance",
    "method",
    "status",
    "objective",
    "bound",
    "gap",
    "wall_time_s",
    "total_idle",
    "makespan",
    "total_completion",
    "surplus_total",
    "plan_file",
)

EXACT_METHODS = {f"{kind}-exact": kind for kind in MODEL_BUILDERS}
SRH_METHODS = {f"srh-{kind}": kind for kind in MODEL_BUILDERS}

METHODS = tuple(EXACT_METHODS) + tuple(RULES) + tuple(SRH_METHODS)

_RANK_KEY = {
    "m1": "total_idle",
    "m2": "makespan",
    "am2": "makespan",
    "m3": "total_completion",
}


def best_rule_start(inst: Instance, cat, model, kind: str):
    """Assignment of the best two-phase rule plan, as a warm start.

    Rules that exhaust the horizon are skipped; plans for the contiguous
    models are compacted first.  None when no rule yields an encodable plan.
    """
    best_values = None
    best_key = None
    for rule in RULES.values():
        try:
            plan, rule_cat = run_rule(inst, rule)
        except HorizonExhausted:
            continue
        scored = metrics(inst, rule_cat, plan)
        key = getattr(scored, _RANK_KEY[kind])
        if best_key is not None and key >= best_key:
            continue
        candidate = compact(plan, rule_cat) if kind != "m1" else plan
        values = encode(model, candidate, rule_cat, cat)
        if values is not None:
            best_values = values
            best_key = key
    return best_values


def _objective_text(kind: str, value, unit_scale: int) -> str:
    if value is None:
        return ""
    if kind == "m1":
        return format_quantity(value, unit_scale)
    return str(value)


def _gap_text(objective, bound) -> str:
    if objective is None or bound is None:
        return ""
    if objective == bound:
        return "0"
    if objective == 0:
        return ""
    return f"{float(objective - bound) / abs(float(objective)):.6f}"


def _run_exact(label: str, inst: Instance, kind: str, limits: SolveLimits,
               patterns_mode: str, bound_kind: str, warm_start: bool):
    cat = build_catalog(inst, patterns_mode)
    model = MODEL_BUILDERS[kind](inst, cat)
    initial = best_rule_start(inst, cat, model, kind) if warm_start else None
    solution = solve(model, limits, make_bound(bound_kind, model, inst, cat),
                     initial_values=initial)
    plan = None
    if solution.values is not None:
        plan = decode(model, solution, cat)
    return solution, plan, cat


def run_benchmark(suite, methods, limits: SolveLimits | None = None,
                  plans_dir: str | Path | None = None,
                  patterns_mode: str = "maximal", bound_kind: str = "demand",
                  warm_start: bool = True) -> list[dict]:
    """Run every (instance, method) cell; rows come back in suite order.

    ``suite`` holds (label, Instance) pairs.  With ``plans_dir`` set, every
    feasible plan is stored as ``<label>__<method>.plan`` and referenced
    from its row.
    """
    limits = limits or SolveLimits()
    if plans_dir is not None:
        plans_dir = Path(plans_dir)
        plans_dir.mkdir(parents=True, exist_ok=True)

    rows = []
    for label, inst in suite:
        for method in methods:
            rows.append(
                _run_cell(label, inst, method, limits, plans_dir,
                          patterns_mode, bound_kind, warm_start)
            )
    return rows


def _run_cell(label, inst, method, limits, plans_dir, patterns_mode,
              bound_kind, warm_start) -> dict:
    row = {column: "" for column in REPORT_COLUMNS}
    row["instance"] = label
    row["method"] = method
    started = time.perf_counter()
    plan = cat = None
    try:
        if method in EXACT_METHODS:
            kind = EXACT_METHODS[method]
            solution, plan, cat = _run_exact(
                label, inst, kind, limits, patterns_mode, bound_kind, warm_start
            )
            row["status"] = solution.status
            row["objective"] = _objective_text(kind, solution.objective_value,
                                               inst.unit_scale)
            if solution.bound is not None:
                row["bound"] = _objective_text(kind, solution.bound, inst.unit_scale)
            row["gap"] = _gap_text(solution.objective_value, solution.bound)
        elif method in SRH_METHODS:
            kind = SRH_METHODS[method]
            result = run_srh(inst, kind, limits, bound_kind)
            row["status"] = result.status
            plan, cat = result.plan, result.catalog
            row["objective"] = _objective_text(kind, result.solution.objective_value,
                                               inst.unit_scale)
            if result.solution.bound is not None:
                row["bound"] = _objective_text(kind, result.solution.bound,
                                               inst.unit_scale)
            row["gap"] = _gap_text(result.solution.objective_value,
                                   result.solution.bound)
        elif method in RULES:
            try:
                plan, cat = run_rule(inst, RULES[method])
                row["status"] = "ok"
            except HorizonExhausted:
                row["status"] = "horizon-exhausted"
        else:
            raise ValueError(f"unknown method {method!r}")
    except Exception as error:  # record, never abort the sweep
        row["status"] = f"error: {type(error).__name__}"
        row["wall_time_s"] = f"{time.perf_counter() - started:.3f}"
        return row

    row["wall_time_s"] = f"{time.perf_counter() - started:.3f}"
    if plan is not None and cat is not None:
        problems = verify(inst, cat, plan)
        if problems:
            row["status"] = "error: plan failed verification"
            return row
        scored = metrics(inst, cat, plan)
        row["total_idle"] = format_quantity(scored.total_idle, inst.unit_scale)
        row["makespan"] = str(scored.makespan)
        row["total_completion"] = str(scored.total_completion)
        row["surplus_total"] = str(scored.total_surplus)
        if method in RULES:
            row["objective"] = row["total_idle"]
        if plans_dir is not None:
            name = f"{label}__{method}.plan"
            path = plans_dir / name
            path.write_text(plan_to_text(plan, cat, inst, instance_label=label))
            row["plan_file"] = name
    return row


def format_report(rows, meta: dict | None = None) -> str:
    """Comma-separated table with `# key=value` header comments."""
    lines = []
    for key, value in (meta or {}).items():
        lines.append(f"# {key}={value}")
    lines.append(",".join(REPORT_COLUMNS))
    for row in rows:
        lines.append(",".join(str(row[column]) for column in REPORT_COLUMNS))
    return "\n".join(lines) + "\n"
