"""Production plans: the mold-by-period grid, verification, and scoring.

A plan fully specifies each mold in each period: a pattern start, a
continuation of an earlier start, or idle.  ``verify`` checks a plan
against the production semantics using only the instance and the pattern
catalog — never a model's constraints — so it genuinely cross-validates
the integer programs and the heuristics.
"""

from __future__ import annotations

from dataclasses import dataclass

from .instance import Instance, InstanceFormatError, format_quantity
from .patterns import CONTINUATION, Pattern, PatternCatalog, catalog_from_patterns

IDLE = -1


class PlanDecodeError(RuntimeError):
    """Solver assignment cannot be laid out as a grid (defensive)."""


@dataclass(frozen=True)
class ProductionPlan:
    """M x T grid; cell values: IDLE, CONTINUATION, or a pattern index >= 1."""

    cells: tuple[tuple[int, ...], ...]

    @property
    def num_molds(self) -> int:
        return len(self.cells)

    @property
    def periods(self) -> int:
        return len(self.cells[0]) if self.cells else 0

    def starts(self):
        """Yield (mold, period, pattern index), zero-based mold and period."""
        for m, row in enumerate(self.cells):
            for t, cell in enumerate(row):
                if cell > CONTINUATION:
                    yield m, t, cell


def empty_plan(num_molds: int, periods: int) -> ProductionPlan:
    return ProductionPlan(tuple((IDLE,) * periods for _ in range(num_molds)))


@dataclass(frozen=True)
class PlanMetrics:
    total_idle: int
    makespan: int
    total_completion: int
    surplus: tuple[tuple[int, ...], ...]
    demand_met: bool

    @property
    def total_surplus(self) -> int:
        return sum(s for row in self.surplus for s in row)


def produced_counts(cat: PatternCatalog, plan: ProductionPlan,
                    inst: Instance) -> list[list[int]]:
    """Beams produced per (type, length index), counting every start."""
    counts = [[0] * bt.num_lengths for bt in inst.beam_types]
    for _, _, i in plan.starts():
        pattern = cat.patterns[i]
        for k, a in enumerate(pattern.counts):
            counts[pattern.type_index][k] += a
    return counts


def verify(inst: Instance, cat: PatternCatalog, plan: ProductionPlan) -> list[str]:
    """Violations of the production semantics; empty list means the plan is valid.

    Checked: grid shape, continuation runs exactly matching each start's
    curing time, no continuation in period 1, capacity of every started
    pattern in its mold, starts completing within the horizon, and demand
    coverage.  Violations are data, not faults.
    """
    problems: list[str] = []
    if plan.num_molds != inst.num_molds:
        problems.append(
            f"plan has {plan.num_molds} molds, instance has {inst.num_molds}"
        )
        return problems
    for m, row in enumerate(plan.cells):
        if len(row) != inst.periods:
            problems.append(
                f"mold {m + 1}: plan row has {len(row)} periods, "
                f"instance has {inst.periods}"
            )
            return problems

    for m, row in enumerate(plan.cells):
        remaining = 0
        for t, cell in enumerate(row):
            where = f"mold {m + 1}, period {t + 1}"
            if cell > CONTINUATION:
                if remaining > 0:
                    problems.append(f"{where}: start interrupts an unfinished run")
                if not 1 <= cell <= cat.size:
                    problems.append(f"{where}: unknown pattern index {cell}")
                    remaining = 0
                    continue
                duration = cat.durations[cell]
                if cat.used[cell] > inst.molds[m]:
                    problems.append(
                        f"{where}: pattern {cell} uses "
                        f"{format_quantity(cat.used[cell], inst.unit_scale)} "
                        f"but the mold holds "
                        f"{format_quantity(inst.molds[m], inst.unit_scale)}"
                    )
                if t + duration > inst.periods:
                    problems.append(
                        f"{where}: start of pattern {cell} would finish at period "
                        f"{t + duration}, past the horizon {inst.periods}"
                    )
                remaining = min(duration - 1, inst.periods - t - 1)
            elif cell == CONTINUATION:
                if t == 0:
                    problems.append(f"{where}: continuation marker in the first period")
                elif remaining == 0:
                    problems.append(f"{where}: continuation without an unfinished start")
                else:
                    remaining -= 1
            elif cell == IDLE:
                if remaining > 0:
                    problems.append(
                        f"{where}: run cut short, expected {remaining} more "
                        f"continuation period(s)"
                    )
                    remaining = 0
            else:
                problems.append(f"{where}: invalid cell code {cell}")

    counted = [[0] * bt.num_lengths for bt in inst.beam_types]
    for m, t, i in plan.starts():
        if not 1 <= i <= cat.size:
            continue
        if t + cat.durations[i] > inst.periods:
            continue  # overruns never count toward demand
        pattern = cat.patterns[i]
        for k, a in enumerate(pattern.counts):
            counted[pattern.type_index][k] += a
    for c, bt in enumerate(inst.beam_types):
        for k, demand in enumerate(bt.demands):
            if counted[c][k] < demand:
                problems.append(
                    f"demand shortfall for type {c + 1} length "
                    f"{format_quantity(bt.lengths[k], inst.unit_scale)}: "
                    f"produced {counted[c][k]} of {demand}"
                )
    return problems


def metrics(inst: Instance, cat: PatternCatalog, plan: ProductionPlan) -> PlanMetrics:
    """Score a verified plan; refuses plans that do not verify."""
    problems = verify(inst, cat, plan)
    if problems:
        raise ValueError("plan does not verify: " + "; ".join(problems))
    total_idle = 0
    for m, _, i in plan.starts():
        total_idle += cat.idle[i][m]
    makespan = 0
    total_completion = 0
    for row in plan.cells:
        for t, cell in enumerate(row):
            if cell != IDLE:
                total_completion += 1
                makespan = max(makespan, t + 1)
    produced = produced_counts(cat, plan, inst)
    surplus = tuple(
        tuple(produced[c][k] - bt.demands[k] for k in range(bt.num_lengths))
        for c, bt in enumerate(inst.beam_types)
    )
    demand_met = all(s >= 0 for row in surplus for s in row)
    return PlanMetrics(
        total_idle=total_idle,
        makespan=makespan,
        total_completion=total_completion,
        surplus=surplus,
        demand_met=demand_met,
    )


def compact(plan: ProductionPlan, cat: PatternCatalog) -> ProductionPlan:
    """Left-shift each mold's starts back-to-back from period 1.

    Demand coverage and idle cost are unchanged; the result satisfies the
    contiguity discipline of the makespan and completion-time models.
    """
    grid = [[IDLE] * plan.periods for _ in range(plan.num_molds)]
    for m, row in enumerate(plan.cells):
        cursor = 0
        for cell in row:
            if cell > CONTINUATION:
                grid[m][cursor] = cell
                for offset in range(1, cat.durations[cell]):
                    grid[m][cursor + offset] = CONTINUATION
                cursor += cat.durations[cell]
    return ProductionPlan(tuple(tuple(row) for row in grid))


def encode(model, plan: ProductionPlan, plan_cat: PatternCatalog,
           model_cat: PatternCatalog):
    """Express a plan as a variable assignment of the given model.

    Returns None when some started pattern or start period has no variable
    in the model (the plan then cannot seed that model).  Feasibility is
    not checked here; the solver re-verifies warm starts exactly.
    """
    values = [0] * len(model.variables)
    last_active = 0
    for m, row in enumerate(plan.cells):
        for t, cell in enumerate(row):
            if cell == IDLE:
                continue
            last_active = max(last_active, t + 1)
            if cell == CONTINUATION:
                key = ("x", 0, m + 1, t + 1)
            else:
                index = model_cat.index_of(plan_cat.patterns[cell])
                if index is None:
                    return None
                key = ("x", index, m + 1, t + 1)
            if key not in model.var_index:
                return None
            values[model.var_index[key]] = 1
    for t in range(1, plan.periods + 1):
        if ("zt", t) in model.var_index:
            active = any(plan.cells[m][t - 1] != IDLE for m in range(plan.num_molds))
            values[model.var_index[("zt", t)]] = 1 if active else 0
    if ("z",) in model.var_index:
        values[model.var_index[("z",)]] = max(1, last_active)
    return values


def decode(model, solution, cat: PatternCatalog) -> ProductionPlan:
    """Lay a feasible assignment out as a plan grid.

    Start variables become starts, continuation-marker variables become
    continuation cells, everything else is idle.  Raises PlanDecodeError if
    the assignment puts two patterns in one cell, which a feasible solution
    never does.
    """
    num_molds = 0
    periods = 0
    for key in model.keys:
        if key[0] == "x":
            num_molds = max(num_molds, key[2])
            periods = max(periods, key[3])
    grid = [[IDLE] * periods for _ in range(num_molds)]
    for pos, key in enumerate(model.keys):
        if key[0] != "x" or solution.values[pos] == 0:
            continue
        _, i, m, t = key
        if grid[m - 1][t - 1] != IDLE:
            raise PlanDecodeError(f"two patterns assigned to mold {m}, period {t}")
        grid[m - 1][t - 1] = i
    return ProductionPlan(tuple(tuple(row) for row in grid))


def plan_to_text(plan: ProductionPlan, cat: PatternCatalog, inst: Instance,
                 instance_label: str = "unnamed") -> str:
    """Diff-friendly text grid, self-contained modulo the instance.

    Header comments carry the catalog mode and the definition of every
    referenced pattern, so the file re-parses without the original catalog.
    """
    used = sorted({i for _, _, i in plan.starts()})
    lines = [
        f"# plan instance={instance_label} catalog={cat.mode} "
        f"molds={plan.num_molds} periods={plan.periods}"
    ]
    for i in used:
        pattern = cat.patterns[i]
        counts = ",".join(str(a) for a in pattern.counts)
        lines.append(f"# pattern {i}: type={pattern.type_index + 1} counts={counts}")
    for row in plan.cells:
        tokens = []
        for cell in row:
            if cell == IDLE:
                tokens.append(".")
            elif cell == CONTINUATION:
                tokens.append("C")
            else:
                tokens.append(f"S{cell}")
        lines.append(" ".join(tokens))
    return "\n".join(lines) + "\n"


def plan_from_text(text: str, inst: Instance) -> tuple[ProductionPlan, PatternCatalog]:
    """Parse a plan file back into a grid plus an explicit catalog."""
    patterns_by_index: dict[int, Pattern] = {}
    grid_rows: list[list[str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if body.startswith("pattern "):
                try:
                    head, fields = body.split(":", 1)
                    index = int(head.split()[1])
                    parts = dict(
                        item.split("=", 1) for item in fields.split()
                    )
                    pattern = Pattern(
                        type_index=int(parts["type"]) - 1,
                        counts=tuple(int(a) for a in parts["counts"].split(",")),
                    )
                except (KeyError, ValueError, IndexError):
                    raise InstanceFormatError("malformed pattern header", lineno)
                patterns_by_index[index] = pattern
            continue
        grid_rows.append(line.split())

    cat = catalog_from_patterns(inst, list(patterns_by_index.values()), mode="explicit")
    remap = {
        old: cat.index_of(pattern) for old, pattern in patterns_by_index.items()
    }
    cells: list[tuple[int, ...]] = []
    for lineno, tokens in enumerate(grid_rows, start=1):
        row = []
        for token in tokens:
            if token == ".":
                row.append(IDLE)
            elif token == "C":
                row.append(CONTINUATION)
            elif token.startswith("S"):
                try:
                    old = int(token[1:])
                except ValueError:
                    raise InstanceFormatError(f"bad plan token {token!r}")
                if old not in remap:
                    raise InstanceFormatError(
                        f"plan references undeclared pattern {old}"
                    )
                row.append(remap[old])
            else:
                raise InstanceFormatError(f"bad plan token {token!r}")
        cells.append(tuple(row))
    return ProductionPlan(tuple(cells)), cat
