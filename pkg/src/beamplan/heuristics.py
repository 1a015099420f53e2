"""Constructive priority rules and the size-reduction matheuristic.

Each priority rule runs in two phases: build a plan that meets every
demand with zero surplus, then grow each started pattern until it is
maximal in its mold.  The size-reduction heuristic instead solves the
requested integer program restricted to the qc-maximal pattern subset,
trading optimality (and possibly feasibility) for a much smaller model.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ilp import IlpModel, IlpSolution, MODEL_BUILDERS
from .instance import Instance
from .patterns import (
    CONTINUATION,
    Pattern,
    PatternCatalog,
    catalog_from_patterns,
    select_qc_maximal,
)
from .plan import IDLE, ProductionPlan, decode
from .solver import SolveLimits, make_bound, solve


class HorizonExhausted(RuntimeError):
    """Residual demand is left after the last period that can host a start."""


@dataclass(frozen=True)
class RuleSpec:
    """Priority pair: curing time first, then beam length within the type."""

    curing_priority: str  # "shortest-first" | "longest-first"
    length_priority: str  # "shortest-first" | "largest-first" | "alternate"


RULES: dict[str, RuleSpec] = {
    "sctsl": RuleSpec("shortest-first", "shortest-first"),
    "sctll": RuleSpec("shortest-first", "largest-first"),
    "sctal": RuleSpec("shortest-first", "alternate"),
    "lctsl": RuleSpec("longest-first", "shortest-first"),
    "lctll": RuleSpec("longest-first", "largest-first"),
    "lctal": RuleSpec("longest-first", "alternate"),
}


def _type_order(inst: Instance, rule: RuleSpec, residual) -> list[int]:
    pending = [c for c in range(inst.num_types) if any(r > 0 for r in residual[c])]
    if rule.curing_priority == "shortest-first":
        return sorted(pending, key=lambda c: (inst.beam_types[c].curing_time, c))
    if rule.curing_priority == "longest-first":
        return sorted(pending, key=lambda c: (-inst.beam_types[c].curing_time, c))
    raise ValueError(f"unknown curing priority {rule.curing_priority!r}")


def _length_visit_order(pending: list[int], priority: str) -> list[int]:
    """Order of length indices to pack; ``pending`` is ascending by length."""
    if priority == "shortest-first":
        return list(pending)
    if priority == "largest-first":
        return list(reversed(pending))
    if priority == "alternate":
        order = []
        left, right = 0, len(pending) - 1
        take_short = True
        while left <= right:
            if take_short:
                order.append(pending[left])
                left += 1
            else:
                order.append(pending[right])
                right -= 1
            take_short = not take_short
        return order
    raise ValueError(f"unknown length priority {priority!r}")


def _pack(inst: Instance, c: int, capacity: int, residual_c, priority: str):
    """Greedy batch packing of one type into one mold, demand-capped."""
    bt = inst.beam_types[c]
    pending = [k for k in range(bt.num_lengths) if residual_c[k] > 0]
    counts = [0] * bt.num_lengths
    room = capacity
    for k in _length_visit_order(pending, priority):
        length = bt.lengths[k]
        if length > room:
            continue
        take = min(residual_c[k], room // length)
        counts[k] = take
        room -= take * length
    return counts


def run_priority_rule(inst: Instance, rule: RuleSpec) -> tuple[ProductionPlan, PatternCatalog]:
    """Phase 1: dispatch molds period by period until every demand is met.

    Whenever a mold is free, the pending beam type chosen by the curing
    priority is packed greedily by the length priority, never beyond the
    residual demand, so the resulting plan has zero surplus.  Types whose
    curing cannot finish within the horizon, or with no fitting length,
    fall through to the next type; if no type fits, the mold stays idle.

    Raises HorizonExhausted when demand is left after the last start slot.
    """
    residual = [list(bt.demands) for bt in inst.beam_types]
    free_at = [0] * inst.num_molds
    placements: list[list[tuple[int, Pattern]]] = [[] for _ in range(inst.num_molds)]

    for t in range(inst.periods):
        for m in range(inst.num_molds):
            if free_at[m] > t:
                continue
            for c in _type_order(inst, rule, residual):
                duration = inst.beam_types[c].curing_time
                if t + duration > inst.periods:
                    continue
                counts = _pack(inst, c, inst.molds[m], residual[c], rule.length_priority)
                if not any(counts):
                    continue
                placements[m].append((t, Pattern(c, tuple(counts))))
                for k, a in enumerate(counts):
                    residual[c][k] -= a
                free_at[m] = t + duration
                break

    leftover = sum(r for per_type in residual for r in per_type)
    if leftover:
        raise HorizonExhausted(
            f"{leftover} beam(s) of residual demand cannot start within "
            f"{inst.periods} period(s)"
        )
    return _materialize(inst, placements)


def _materialize(inst: Instance, placements) -> tuple[ProductionPlan, PatternCatalog]:
    patterns = [p for per_mold in placements for _, p in per_mold]
    cat = catalog_from_patterns(inst, patterns)
    grid = [[IDLE] * inst.periods for _ in range(inst.num_molds)]
    for m, per_mold in enumerate(placements):
        for t, pattern in per_mold:
            grid[m][t] = cat.index_of(pattern)
            for offset in range(1, inst.beam_types[pattern.type_index].curing_time):
                grid[m][t + offset] = CONTINUATION
    return ProductionPlan(tuple(tuple(row) for row in grid)), cat


def maximalize(inst: Instance, cat: PatternCatalog, plan: ProductionPlan,
               cap_surplus: bool = False) -> tuple[ProductionPlan, PatternCatalog]:
    """Phase 2: grow each started pattern until it is maximal in its mold.

    Beams of the pattern's own type are added largest length first; demand
    coverage only grows.  With ``cap_surplus`` additions stop at the
    instance demands, so patterns may stay non-maximal.
    """
    remaining_demand = None
    if cap_surplus:
        produced = [[0] * bt.num_lengths for bt in inst.beam_types]
        for _, _, i in plan.starts():
            p = cat.patterns[i]
            for k, a in enumerate(p.counts):
                produced[p.type_index][k] += a
        remaining_demand = [
            [max(0, bt.demands[k] - produced[c][k]) for k in range(bt.num_lengths)]
            for c, bt in enumerate(inst.beam_types)
        ]

    placements: list[list[tuple[int, Pattern]]] = [[] for _ in range(inst.num_molds)]
    for m, t, i in sorted(plan.starts()):
        pattern = cat.patterns[i]
        bt = inst.beam_types[pattern.type_index]
        counts = list(pattern.counts)
        room = inst.molds[m] - cat.used[i]
        for k in sorted(range(bt.num_lengths), key=lambda k: -bt.lengths[k]):
            take = room // bt.lengths[k]
            if cap_surplus:
                take = min(take, remaining_demand[pattern.type_index][k])
                remaining_demand[pattern.type_index][k] -= take
            counts[k] += take
            room -= take * bt.lengths[k]
        placements[m].append((t, Pattern(pattern.type_index, tuple(counts))))
    return _materialize(inst, placements)


def run_rule(inst: Instance, rule: RuleSpec) -> tuple[ProductionPlan, PatternCatalog]:
    """Both phases of one priority rule."""
    plan, cat = run_priority_rule(inst, rule)
    return maximalize(inst, cat, plan)


@dataclass
class SrhResult:
    """Outcome of the size-reduction heuristic.

    The objective value is an upper bound for the full problem;
    ``infeasible-reduced`` means the reduced model has no solution, which
    says nothing about the full model.
    """

    status: str  # optimal | feasible | infeasible-reduced | limit-reached
    solution: IlpSolution
    model: IlpModel
    catalog: PatternCatalog
    plan: ProductionPlan | None


def run_srh(inst: Instance, model_kind: str = "m1",
            limits: SolveLimits | None = None,
            bound_kind: str = "demand") -> SrhResult:
    """Solve the requested model over the qc-maximal pattern subset."""
    cat = select_qc_maximal(inst)
    model = MODEL_BUILDERS[model_kind](inst, cat)
    solution = solve(model, limits, make_bound(bound_kind, model, inst, cat))
    status = "infeasible-reduced" if solution.status == "infeasible" else solution.status
    plan = None
    if solution.values is not None:
        plan = decode(model, solution, cat)
    return SrhResult(status, solution, model, cat, plan)
