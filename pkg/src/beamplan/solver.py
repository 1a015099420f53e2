"""Exact solution of the integer programs by depth-first branch and bound.

The solver consumes the abstract model only: bound propagation over the
linear rows, a pluggable lower bound, deterministic branching (earliest
variable in creation order, or most-fractional under the LP bound), and
exact integer re-evaluation of every incumbent.  A brute-force schedule
enumerator doubles as the test oracle on tiny instances.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from fractions import Fraction
from math import ceil, inf

from . import _simplex
from .ilp import IlpModel, IlpSolution, SolveStats
from .instance import Instance
from .patterns import PatternCatalog
from .plan import IDLE, ProductionPlan

log = logging.getLogger("beamplan.solver")


class OracleGuardError(RuntimeError):
    """Brute-force search space exceeds the configured guard."""


@dataclass(frozen=True)
class SolveLimits:
    """Node/time budget and the optimality gap to stop at (0 proves optimality)."""

    max_nodes: int | None = None
    max_seconds: float | None = None
    target_gap: Fraction = Fraction(0)

    def __post_init__(self):
        if self.max_nodes is not None and self.max_nodes <= 0:
            raise ValueError("max_nodes must be positive or None")
        if self.max_seconds is not None and self.max_seconds <= 0:
            raise ValueError("max_seconds must be positive or None")
        if self.target_gap < 0:
            raise ValueError("target_gap must be non-negative")


@dataclass
class NodeBound:
    value: int | Fraction
    infeasible: bool = False
    branch_hint: int | None = None
    integral_solution: list[int] | None = None
    skip_probe: bool = False  # the all-lower-bounds point is known infeasible


class _Propagator:
    """Integer bound tightening over the model's linear rows."""

    def __init__(self, model: IlpModel):
        self.rows = [(c.terms, c.sense, c.rhs) for c in model.constraints]
        self.touching: list[list[int]] = [[] for _ in model.variables]
        for idx, (terms, _, _) in enumerate(self.rows):
            for pos, _ in terms:
                self.touching[pos].append(idx)

    def run(self, lowers: list[int], uppers: list[int],
            seed_var: int | None = None) -> bool:
        """Tighten bounds to a fixpoint; False when some row is unsatisfiable.

        ``seed_var`` starts from the rows touching one just-changed variable
        (the parent state was already a fixpoint); None reconsiders all rows.
        """
        rows = self.rows
        touching = self.touching
        if seed_var is None:
            queue = list(range(len(rows)))
            queued = [True] * len(rows)
        else:
            queue = list(touching[seed_var])
            queued = [False] * len(rows)
            for row in queue:
                queued[row] = True
        head = 0
        while head < len(queue):
            row = queue[head]
            queued[row] = False
            head += 1
            terms, sense, rhs = rows[row]
            minact = 0
            maxact = 0
            for pos, a in terms:
                if a > 0:
                    minact += a * lowers[pos]
                    maxact += a * uppers[pos]
                else:
                    minact += a * uppers[pos]
                    maxact += a * lowers[pos]
            if sense != ">=":
                if minact > rhs:
                    return False
                slack = rhs - minact
                for pos, a in terms:
                    if a > 0:
                        new_upper = lowers[pos] + slack // a
                        if new_upper < uppers[pos]:
                            uppers[pos] = new_upper
                            if new_upper < lowers[pos]:
                                return False
                            for other in touching[pos]:
                                if not queued[other]:
                                    queued[other] = True
                                    queue.append(other)
                    else:
                        new_lower = uppers[pos] - slack // (-a)
                        if new_lower > lowers[pos]:
                            lowers[pos] = new_lower
                            if new_lower > uppers[pos]:
                                return False
                            for other in touching[pos]:
                                if not queued[other]:
                                    queued[other] = True
                                    queue.append(other)
            if sense != "<=":
                if maxact < rhs:
                    return False
                slack = maxact - rhs
                for pos, a in terms:
                    if a > 0:
                        new_lower = uppers[pos] - slack // a
                        if new_lower > lowers[pos]:
                            lowers[pos] = new_lower
                            if new_lower > uppers[pos]:
                                return False
                            for other in touching[pos]:
                                if not queued[other]:
                                    queued[other] = True
                                    queue.append(other)
                    else:
                        new_upper = lowers[pos] + slack // (-a)
                        if new_upper < uppers[pos]:
                            uppers[pos] = new_upper
                            if new_upper < lowers[pos]:
                                return False
                            for other in touching[pos]:
                                if not queued[other]:
                                    queued[other] = True
                                    queue.append(other)
        return True


def _satisfied(model: IlpModel, values) -> bool:
    for con in model.constraints:
        activity = sum(a * values[pos] for pos, a in con.terms)
        if con.sense == "<=" and activity > con.rhs:
            return False
        if con.sense == ">=" and activity < con.rhs:
            return False
        if con.sense == "=" and activity != con.rhs:
            return False
    return True


class TrivialBound:
    """Sum of each variable's cheapest admissible contribution."""

    kind = "trivial"

    def __init__(self, model: IlpModel):
        self.objective = model.objective

    def evaluate(self, lowers, uppers) -> NodeBound:
        total = 0
        for pos, coeff in self.objective:
            total += coeff * (lowers[pos] if coeff > 0 else uppers[pos])
        return NodeBound(total)


class DemandBound:
    """Committed cost plus residual-demand reasoning over the catalog.

    Valid for every model built here: a coverage check prunes nodes whose
    remaining cells cannot produce the residual demand.  The idle objective
    adds residual volume times the best idle-per-length ratio among the
    patterns the model may still start; the makespan and completion-time
    objectives add the mold-periods the residual production still needs.
    """

    kind = "demand-lb"

    def __init__(self, model: IlpModel, inst: Instance, cat: PatternCatalog):
        self.model = model
        self.objective = model.objective
        self.num_molds = inst.num_molds
        self.longest_mold = max(inst.molds)
        self.curing = [bt.curing_time for bt in inst.beam_types]
        self.pairs = [
            (c, k)
            for c, bt in enumerate(inst.beam_types)
            for k in range(bt.num_lengths)
        ]
        pair_pos = {pair: idx for idx, pair in enumerate(self.pairs)}
        self.demands = [inst.beam_types[c].demands[k] for c, k in self.pairs]
        self.lengths = [inst.beam_types[c].lengths[k] for c, k in self.pairs]
        self.type_of_pair = [c for c, _ in self.pairs]

        self.x_positions = [
            pos for pos, key in enumerate(model.keys) if key[0] == "x"
        ]
        self.cells: dict[tuple[int, int], list[tuple[int, int]]] = {}
        for pos, key in enumerate(model.keys):
            if key[0] == "x" and key[1] != 0:
                _, i, m, t = key
                self.cells.setdefault((m, t), []).append((pos, i))
        self.cell_list = sorted(self.cells)

        self.production: list[list[tuple[int, int]]] = [[] for _ in model.variables]
        ratios: dict[int, Fraction] = {}
        seen_pairs: set[tuple[int, int]] = set()
        for (m, t), entries in self.cells.items():
            for pos, i in entries:
                pattern = cat.patterns[i]
                rows = [
                    (pair_pos[(pattern.type_index, k)], a)
                    for k, a in enumerate(pattern.counts)
                    if a > 0
                ]
                self.production[pos] = rows
                if (i, m) not in seen_pairs:
                    seen_pairs.add((i, m))
                    if cat.used[i] > 0:
                        ratio = Fraction(cat.idle[i][m - 1], cat.used[i])
                        c = pattern.type_index
                        if c not in ratios or ratio < ratios[c]:
                            ratios[c] = ratio
        self.ratios = ratios
        self.cell_max = {
            cell: self._cell_max(entries, cat)
            for cell, entries in self.cells.items()
        }

    def _cell_max(self, entries, cat) -> list[tuple[int, int]]:
        best: dict[int, int] = {}
        for pos, _ in entries:
            for pair, n in self.production[pos]:
                if n > best.get(pair, 0):
                    best[pair] = n
        return sorted(best.items())

    def evaluate(self, lowers, uppers) -> NodeBound:
        base = 0
        for pos, coeff in self.objective:
            base += coeff * (lowers[pos] if coeff > 0 else uppers[pos])

        committed = [0] * len(self.pairs)
        capacity = [0] * len(self.pairs)
        for cell in self.cell_list:
            entries = self.cells[cell]
            started = None
            open_cell = False
            for pos, _ in entries:
                if lowers[pos] == 1:
                    started = pos
                    break
                if uppers[pos] == 1:
                    open_cell = True
            if started is not None:
                for pair, n in self.production[started]:
                    committed[pair] += n
                    capacity[pair] += n
            elif open_cell:
                for pair, n in self.cell_max[cell]:
                    capacity[pair] += n

        residual_volume: dict[int, int] = {}
        for idx, demand in enumerate(self.demands):
            short = demand - committed[idx]
            if short <= 0:
                continue
            if capacity[idx] < demand:
                return NodeBound(0, infeasible=True)
            c = self.type_of_pair[idx]
            residual_volume[c] = residual_volume.get(c, 0) + short * self.lengths[idx]

        if not residual_volume:
            return NodeBound(base)

        name = self.model.name
        extra = 0
        if name == "m1":
            for c, volume in residual_volume.items():
                ratio = self.ratios.get(c)
                if ratio is None:
                    return NodeBound(0, infeasible=True)
                if ratio > 0:
                    scaled = volume * ratio
                    extra += scaled.numerator // scaled.denominator
            return NodeBound(base + extra, skip_probe=True)

        # mold-periods the residual beams still need: each start of type c
        # delivers at most the longest mold's length and holds its mold for
        # the type's curing time
        residual_busy = 0
        longest_curing = 0
        for c, volume in residual_volume.items():
            starts_needed = -(-volume // self.longest_mold)
            residual_busy += starts_needed * self.curing[c]
            longest_curing = max(longest_curing, self.curing[c])

        if name == "m3":
            return NodeBound(base + residual_busy, skip_probe=True)

        committed_busy = sum(lowers[pos] for pos in self.x_positions)
        periods_needed = -(-(committed_busy + residual_busy) // self.num_molds)
        value = max(base, periods_needed, longest_curing)
        return NodeBound(value, skip_probe=True)


class LpRelaxationBound:
    """Exact continuous relaxation with fixed variables substituted out.

    Feeds the most-fractional branching rule; integral relaxation optima
    are handed back as ready-made incumbents.  Falls back to the demand
    bound if the pivot budget runs out (counted in the solve stats).
    """

    kind = "lp-relaxation"

    def __init__(self, model: IlpModel, fallback=None, max_pivots: int = 20_000):
        self.model = model
        self.fallback = fallback or TrivialBound(model)
        self.max_pivots = max_pivots
        self.fallbacks = 0
        self.costs = [0] * len(model.variables)
        for pos, coeff in model.objective:
            self.costs[pos] = coeff

    def evaluate(self, lowers, uppers) -> NodeBound:
        free = [pos for pos in range(len(lowers)) if lowers[pos] < uppers[pos]]
        slot = {pos: idx for idx, pos in enumerate(free)}
        fixed_cost = sum(
            self.costs[pos] * lowers[pos]
            for pos in range(len(lowers))
            if lowers[pos] == uppers[pos] and self.costs[pos]
        )
        rows = []
        for con in self.model.constraints:
            coeffs = [0] * len(free)
            rhs = con.rhs
            any_free = False
            activity = 0
            for pos, a in con.terms:
                if pos in slot:
                    coeffs[slot[pos]] = a
                    any_free = True
                else:
                    activity += a * lowers[pos]
            rhs -= activity
            if any_free:
                rows.append((coeffs, con.sense, rhs))
            else:
                if con.sense == "<=" and 0 > rhs:
                    return NodeBound(0, infeasible=True)
                if con.sense == ">=" and 0 < rhs:
                    return NodeBound(0, infeasible=True)
                if con.sense == "=" and rhs != 0:
                    return NodeBound(0, infeasible=True)

        result = _simplex.solve_lp(
            [self.costs[pos] for pos in free],
            rows,
            [lowers[pos] for pos in free],
            [uppers[pos] for pos in free],
            max_pivots=self.max_pivots,
        )
        if result.status == _simplex.INFEASIBLE:
            return NodeBound(0, infeasible=True)
        if result.status != _simplex.OPTIMAL:
            self.fallbacks += 1
            return self.fallback.evaluate(lowers, uppers)

        value = result.value + fixed_cost
        bound = ceil(value)  # objective data is integral, so rounding up is safe
        hint = None
        best_frac = Fraction(0)
        for idx, pos in enumerate(free):
            frac = result.solution[idx] - (result.solution[idx].numerator
                                           // result.solution[idx].denominator)
            if frac:
                distance = min(frac, 1 - frac)
                if distance > best_frac:
                    best_frac = distance
                    hint = pos
        if hint is None:
            full = list(lowers)
            for idx, pos in enumerate(free):
                full[pos] = int(result.solution[idx])
            return NodeBound(bound, integral_solution=full)
        return NodeBound(bound, branch_hint=hint)


BOUND_PROVIDERS = {"trivial", "demand", "lp"}


def make_bound(kind: str, model: IlpModel, inst: Instance | None = None,
               cat: PatternCatalog | None = None):
    if kind == "trivial":
        return TrivialBound(model)
    if kind == "demand":
        if inst is None or cat is None:
            raise ValueError("demand bound needs the instance and catalog context")
        return DemandBound(model, inst, cat)
    if kind == "lp":
        fallback = (
            DemandBound(model, inst, cat) if inst is not None and cat is not None
            else TrivialBound(model)
        )
        return LpRelaxationBound(model, fallback)
    raise ValueError(f"unknown bound provider {kind!r}")


def solve(model: IlpModel, limits: SolveLimits | None = None, bound=None,
          log_interval: int = 0, initial_values=None) -> IlpSolution:
    """Depth-first branch and bound to proven optimality or a limit.

    Deterministic for fixed inputs and node limits: binary variables branch
    value 1 first in creation order unless the bound provider supplies a
    most-fractional hint; general integers split their domain in half.
    ``initial_values`` seeds the incumbent (it must be feasible).  Every
    incumbent is re-checked against all rows in exact arithmetic.
    """
    limits = limits or SolveLimits()
    provider = bound or TrivialBound(model)
    propagator = _Propagator(model)
    nonneg_costs = all(coeff >= 0 for _, coeff in model.objective)
    started = time.perf_counter()
    stats = SolveStats()

    root_lowers = [v.lower for v in model.variables]
    root_uppers = [v.upper for v in model.variables]

    incumbent: list[int] | None = None
    incumbent_obj: int | None = None
    limit_hit = False

    def out_of_budget() -> bool:
        if limits.max_nodes is not None and stats.nodes >= limits.max_nodes:
            return True
        if limits.max_seconds is not None:
            return time.perf_counter() - started >= limits.max_seconds
        return False

    def accept(values: list[int], objective: int) -> None:
        nonlocal incumbent, incumbent_obj
        if incumbent_obj is None or objective < incumbent_obj:
            if not _satisfied(model, values):
                raise AssertionError("incumbent fails exact re-evaluation")
            incumbent = list(values)
            incumbent_obj = objective
            log.debug("%s: incumbent %s after %d nodes", model.name, objective, stats.nodes)

    if initial_values is not None:
        values = list(initial_values)
        in_range = all(
            v.lower <= x <= v.upper for v, x in zip(model.variables, values)
        )
        if len(values) != len(model.variables) or not in_range \
                or not _satisfied(model, values):
            raise ValueError("initial_values is not a feasible assignment")
        incumbent = values
        incumbent_obj = model.objective_value(values)

    if not propagator.run(root_lowers, root_uppers):
        return IlpSolution("infeasible", None, None, None, stats)
    root_eval = provider.evaluate(root_lowers, root_uppers)
    if root_eval.infeasible:
        return IlpSolution("infeasible", None, None, None, stats)

    stack: list[tuple[list[int], list[int], int | Fraction, int | None]] = [
        (root_lowers, root_uppers, root_eval.value, -1)
    ]
    gap_satisfied = False
    use_gap = limits.target_gap > 0

    while stack:
        if out_of_budget():
            limit_hit = True
            break
        lowers, uppers, parent_bound, changed = stack.pop()
        stats.nodes += 1
        if log_interval and stats.nodes % log_interval == 0:
            open_bound = min((entry[2] for entry in stack), default=parent_bound)
            log.info(
                "%s: nodes=%d incumbent=%s bound=%s open=%d",
                model.name, stats.nodes, incumbent_obj, open_bound, len(stack),
            )
        if incumbent_obj is not None and parent_bound >= incumbent_obj:
            continue
        if changed != -1:
            if not propagator.run(lowers, uppers, seed_var=changed):
                continue
            node_eval = provider.evaluate(lowers, uppers)
            if node_eval.infeasible:
                continue
            if incumbent_obj is not None and node_eval.value >= incumbent_obj:
                continue
        else:
            node_eval = root_eval

        if node_eval.integral_solution is not None:
            values = node_eval.integral_solution
            accept(values, model.objective_value(values))
            continue

        if node_eval.skip_probe:
            # the provider knows the all-lower-bounds point is infeasible, so
            # propagation would already have failed were everything fixed
            fully_fixed = False
        else:
            fully_fixed = all(lowers[pos] == uppers[pos] for pos in range(len(lowers)))
            if fully_fixed or nonneg_costs:
                # with non-negative costs, the all-lower-bounds point is the
                # cheapest completion of this node: feasible means node solved
                if _satisfied(model, lowers):
                    accept(lowers, model.objective_value(lowers))
                    continue
            if fully_fixed:
                continue

        if use_gap and incumbent_obj is not None:
            open_bound = min((entry[2] for entry in stack), default=node_eval.value)
            open_bound = min(open_bound, node_eval.value)
            threshold = limits.target_gap * max(1, abs(incumbent_obj))
            if incumbent_obj - open_bound <= threshold:
                gap_satisfied = True
                stack.append((lowers, uppers, node_eval.value, None))
                break

        branch = node_eval.branch_hint
        if branch is None or lowers[branch] == uppers[branch]:
            branch = next(
                pos for pos in range(len(lowers)) if lowers[pos] < uppers[pos]
            )
        low, high = lowers[branch], uppers[branch]
        if high - low == 1:
            zero_l, zero_u = list(lowers), list(uppers)
            zero_u[branch] = low
            one_l, one_u = lowers, uppers
            one_l[branch] = high
            stack.append((zero_l, zero_u, node_eval.value, branch))
            stack.append((one_l, one_u, node_eval.value, branch))
        else:
            mid = (low + high) // 2
            upper_l, upper_u = list(lowers), list(uppers)
            upper_l[branch] = mid + 1
            lower_l, lower_u = lowers, uppers
            lower_u[branch] = mid
            stack.append((upper_l, upper_u, node_eval.value, branch))
            stack.append((lower_l, lower_u, node_eval.value, branch))

    stats.wall_time = time.perf_counter() - started
    stats.lp_fallbacks = getattr(provider, "fallbacks", 0)

    open_bounds = [entry[2] for entry in stack]
    if incumbent is None:
        if limit_hit:
            bound_value = min(open_bounds) if open_bounds else None
            return IlpSolution("limit-reached", None, None, bound_value, stats)
        return IlpSolution("infeasible", None, None, None, stats)

    pending = [b for b in open_bounds if b < incumbent_obj]
    if not pending and not gap_satisfied:
        status = "optimal"
        bound_value = incumbent_obj
    else:
        status = "feasible" if (limit_hit or gap_satisfied) else "optimal"
        bound_value = min(pending) if pending else incumbent_obj
    if status == "optimal":
        bound_value = incumbent_obj
    return IlpSolution(status, incumbent_obj, tuple(incumbent), bound_value, stats)


ORACLE_GUARD = 10_000_000


def brute_force_schedule(inst: Instance, cat: PatternCatalog, objective: str,
                         guard: int = ORACLE_GUARD):
    """Exhaustive schedule enumeration; the ground truth on tiny instances.

    Enumerates every assignment of start/continuation/idle per mold and
    period consistent with the production semantics (contiguous activity
    when minimizing makespan or total completion time), and returns the
    optimal (plan, value) or (None, None) when demand cannot be met.

    Raises OracleGuardError when prod over cells of |Q(m)|+2 exceeds the guard.
    """
    if objective not in ("idle", "makespan", "tct"):
        raise ValueError(f"unknown objective {objective!r}")
    contiguous = objective in ("makespan", "tct")
    periods = inst.periods

    space = 1
    for m in range(inst.num_molds):
        space *= (len(cat.compatible[m]) + 2) ** periods
        if space > guard:
            raise OracleGuardError(
                f"search space of about {space} cell assignments exceeds {guard}"
            )

    pairs = [(c, k) for c, bt in enumerate(inst.beam_types)
             for k in range(bt.num_lengths)]
    pair_pos = {pair: idx for idx, pair in enumerate(pairs)}
    demands = tuple(inst.beam_types[c].demands[k] for c, k in pairs)

    def pattern_vector(i: int) -> tuple[int, ...]:
        vec = [0] * len(pairs)
        pattern = cat.patterns[i]
        for k, a in enumerate(pattern.counts):
            vec[pair_pos[(pattern.type_index, k)]] = a
        return tuple(vec)

    vectors = {i: pattern_vector(i) for m in range(inst.num_molds)
               for i in cat.compatible[m]}

    def mold_timelines(m: int):
        """Every feasible start sequence for one mold, as ((t, i), ...)."""
        options = cat.compatible[m]
        out = []

        def rec(t: int, starts: list):
            if t >= periods:
                out.append(tuple(starts))
                return
            for i in options:
                if t + cat.durations[i] <= periods:
                    starts.append((t, i))
                    rec(t + cat.durations[i], starts)
                    starts.pop()
            if contiguous:
                out.append(tuple(starts))
            else:
                rec(t + 1, starts)

        rec(0, [])
        return out

    per_mold = []
    for m in range(inst.num_molds):
        timelines = []
        for starts in mold_timelines(m):
            produced = [0] * len(pairs)
            cost = 0
            last = 0
            busy = 0
            for t, i in starts:
                for idx, n in enumerate(vectors[i]):
                    produced[idx] += n
                cost += cat.idle[i][m]
                last = max(last, t + cat.durations[i])
                busy += cat.durations[i]
            timelines.append((starts, tuple(produced), cost, last, busy))
        per_mold.append(timelines)

    # what the remaining molds can still contribute, for feasibility pruning
    suffix_max = [[0] * len(pairs) for _ in range(inst.num_molds + 1)]
    for m in range(inst.num_molds - 1, -1, -1):
        best = [0] * len(pairs)
        for _, produced, _, _, _ in per_mold[m]:
            for idx, n in enumerate(produced):
                if n > best[idx]:
                    best[idx] = n
        suffix_max[m] = [a + b for a, b in zip(best, suffix_max[m + 1])]

    best_value = inf
    best_choice = None

    def combine(m: int, produced: list[int], idle_cost: int, last: int,
                busy: int, chosen: list):
        nonlocal best_value, best_choice
        if any(
            produced[idx] + suffix_max[m][idx] < demands[idx]
            for idx in range(len(pairs))
        ):
            return
        if m == inst.num_molds:
            value = {"idle": idle_cost, "makespan": last, "tct": busy}[objective]
            if value < best_value:
                best_value = value
                best_choice = list(chosen)
            return
        for starts, vec, cost, mold_last, mold_busy in per_mold[m]:
            chosen.append(starts)
            combine(
                m + 1,
                [a + b for a, b in zip(produced, vec)],
                idle_cost + cost,
                max(last, mold_last),
                busy + mold_busy,
                chosen,
            )
            chosen.pop()

    combine(0, [0] * len(pairs), 0, 0, 0, [])
    if best_choice is None:
        return None, None

    grid = [[IDLE] * periods for _ in range(inst.num_molds)]
    for m, starts in enumerate(best_choice):
        for t, i in starts:
            grid[m][t] = i
            for offset in range(1, cat.durations[i]):
                grid[m][t + offset] = 0
    return ProductionPlan(tuple(tuple(row) for row in grid)), int(best_value)
