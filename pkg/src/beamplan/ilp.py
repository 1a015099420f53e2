"""Abstract integer linear programs over a pattern catalog.

Four builders produce the same start/continuation variable skeleton and
differ in objective and a few constraint families: idle capacity (m1),
makespan via period indicators (m2), makespan via one integer variable
(am2), and total completion time (m3).  Models are solver-neutral sparse
structures; ``export_lp`` renders them in the de-facto standard LP text
format with deterministic names and exact decimal coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .instance import Instance, format_quantity
from .patterns import CONTINUATION, PatternCatalog

# variable/constraint key tuples: ("x", i, m, t) with 1-based m and t,
# ("zt", t), ("z",)
VarKey = tuple


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str  # "binary" | "integer"
    lower: int
    upper: int


@dataclass(frozen=True)
class LinearConstraint:
    name: str
    terms: tuple[tuple[int, int], ...]  # (variable position, coefficient)
    sense: str  # "<=" | ">=" | "="
    rhs: int


@dataclass
class IlpModel:
    name: str
    variables: list[Variable] = field(default_factory=list)
    constraints: list[LinearConstraint] = field(default_factory=list)
    objective: list[tuple[int, int]] = field(default_factory=list)
    objective_scale: int = 1
    var_index: dict[VarKey, int] = field(default_factory=dict)
    keys: list[VarKey] = field(default_factory=list)

    def add_variable(self, key: VarKey, name: str, kind: str,
                     lower: int, upper: int) -> int:
        pos = len(self.variables)
        self.variables.append(Variable(name, kind, lower, upper))
        self.var_index[key] = pos
        self.keys.append(key)
        return pos

    def add_constraint(self, name: str, terms: list[tuple[int, int]],
                       sense: str, rhs: int) -> None:
        self.constraints.append(LinearConstraint(name, tuple(terms), sense, rhs))

    def num_nonzeros(self) -> int:
        return sum(len(c.terms) for c in self.constraints)

    def objective_value(self, values) -> int:
        return sum(coeff * values[pos] for pos, coeff in self.objective)


@dataclass
class SolveStats:
    nodes: int = 0
    wall_time: float = 0.0
    lp_fallbacks: int = 0


@dataclass
class IlpSolution:
    """Outcome of one exact solve.

    ``status`` is one of optimal (proved), feasible (limit hit with an
    incumbent), limit-reached (limit hit with no incumbent), infeasible
    (search exhausted with no incumbent).  ``values`` aligns with
    ``model.variables``; ``bound`` is a proven lower bound on the optimum.
    """

    status: str
    objective_value: int | None
    values: tuple[int, ...] | None
    bound: Fraction | int | None
    stats: SolveStats

    def value_of(self, model: IlpModel, key: VarKey) -> int:
        return self.values[model.var_index[key]]


def _start_periods(periods: int, duration: int, include_late_starts: bool) -> range:
    last = periods if include_late_starts else periods - duration + 1
    return range(1, last + 1)


def _cell_terms(model: IlpModel, cat: PatternCatalog, m: int, t: int) -> list[tuple[int, int]]:
    """All pattern variables of one mold/period cell, continuation included."""
    terms = [(model.var_index[("x", CONTINUATION, m, t)], 1)]
    terms += [
        (model.var_index[("x", i, m, t)], 1)
        for i in cat.compatible[m - 1]
        if ("x", i, m, t) in model.var_index
    ]
    return terms


def _base_model(name: str, inst: Instance, cat: PatternCatalog,
                include_late_starts: bool) -> IlpModel:
    """Variables plus constraint families shared by all four models.

    Starts are pruned to periods that let the pattern finish within the
    horizon unless ``include_late_starts`` asks for the unpruned variant.
    """
    model = IlpModel(name=name)
    periods = inst.periods

    for m in range(1, inst.num_molds + 1):
        for t in range(1, periods + 1):
            model.add_variable(("x", CONTINUATION, m, t), f"x_0_{m}_{t}",
                               "binary", 0, 1)
            for i in cat.compatible[m - 1]:
                if t in _start_periods(periods, cat.durations[i], include_late_starts):
                    model.add_variable(("x", i, m, t), f"x_{i}_{m}_{t}",
                                       "binary", 0, 1)

    # at most one pattern per mold and period, the continuation marker included
    for m in range(1, inst.num_molds + 1):
        for t in range(1, periods + 1):
            model.add_constraint(f"cell_m{m}_t{t}", _cell_terms(model, cat, m, t), "<=", 1)

    # every demand is met, counting only starts that finish within the horizon
    for c, bt in enumerate(inst.beam_types):
        for k in range(bt.num_lengths):
            terms = []
            for m in range(1, inst.num_molds + 1):
                for i in cat.compatible[m - 1]:
                    n = cat.beam_count(i, c, k)
                    if n == 0:
                        continue
                    for t in range(1, periods - cat.durations[i] + 2):
                        if ("x", i, m, t) in model.var_index:
                            terms.append((model.var_index[("x", i, m, t)], n))
            model.add_constraint(f"demand_c{c + 1}_k{k + 1}", terms, ">=", bt.demands[k])

    # a start occupies its mold with continuation markers while curing
    for m in range(1, inst.num_molds + 1):
        for i in cat.compatible[m - 1]:
            duration = cat.durations[i]
            if duration < 2:
                continue
            for t in range(1, periods - duration + 2):
                if ("x", i, m, t) not in model.var_index:
                    continue
                terms = [(model.var_index[("x", i, m, t)], duration - 1)]
                terms += [
                    (model.var_index[("x", CONTINUATION, m, t + alpha)], -1)
                    for alpha in range(1, duration)
                ]
                model.add_constraint(f"run_m{m}_p{i}_t{t}", terms, "<=", 0)

    # no continuation marker in the first period
    for m in range(1, inst.num_molds + 1):
        model.add_constraint(
            f"nocont_m{m}", [(model.var_index[("x", CONTINUATION, m, 1)], 1)], "=", 0
        )

    # a continuation marker needs an unfinished start in a previous period
    max_curing = cat.max_curing
    for m in range(1, inst.num_molds + 1):
        for t in range(2, periods + 1):
            terms = [(model.var_index[("x", CONTINUATION, m, t)], 1)]
            for beta in range(2, max_curing + 1):
                start = t - beta + 1
                if start < 1:
                    continue
                for j in range(beta, max_curing + 1):
                    for i in cat.by_curing[j - 1]:
                        if ("x", i, m, start) in model.var_index:
                            terms.append((model.var_index[("x", i, m, start)], -1))
            model.add_constraint(f"cover_m{m}_t{t}", terms, "<=", 0)

    return model


def _add_contiguity(model: IlpModel, inst: Instance, cat: PatternCatalog) -> None:
    # once a mold goes quiet it never resumes
    for m in range(1, inst.num_molds + 1):
        for t in range(1, inst.periods):
            terms = _cell_terms(model, cat, m, t)
            terms += [(pos, -coeff) for pos, coeff in _cell_terms(model, cat, m, t + 1)]
            model.add_constraint(f"contig_m{m}_t{t}", terms, ">=", 0)


def build_m1(inst: Instance, cat: PatternCatalog,
             include_late_starts: bool = False) -> IlpModel:
    """Minimize total idle capacity of the molds."""
    model = _base_model("m1", inst, cat, include_late_starts)
    model.objective_scale = inst.unit_scale
    for pos, key in enumerate(model.keys):
        if key[0] == "x" and key[1] != CONTINUATION:
            _, i, m, _ = key
            cost = cat.idle[i][m - 1]
            if cost:
                model.objective.append((pos, cost))
    return model


def build_m2(inst: Instance, cat: PatternCatalog,
             include_late_starts: bool = False) -> IlpModel:
    """Minimize the number of production periods, kept contiguous."""
    model = _base_model("m2", inst, cat, include_late_starts)
    for t in range(1, inst.periods + 1):
        model.add_variable(("zt", t), f"z_{t}", "binary", 0, 1)
    num_molds = inst.num_molds
    for t in range(1, inst.periods + 1):
        terms = [(model.var_index[("zt", t)], num_molds)]
        for m in range(1, num_molds + 1):
            terms += [(pos, -coeff) for pos, coeff in _cell_terms(model, cat, m, t)]
        model.add_constraint(f"active_t{t}", terms, ">=", 0)
    _add_contiguity(model, inst, cat)
    model.objective = [(model.var_index[("zt", t)], 1) for t in range(1, inst.periods + 1)]
    return model


def build_am2(inst: Instance, cat: PatternCatalog,
              include_late_starts: bool = False) -> IlpModel:
    """Minimize the index of the last production period (integer variable)."""
    model = _base_model("am2", inst, cat, include_late_starts)
    z = model.add_variable(("z",), "z", "integer", 1, inst.periods)
    for m in range(1, inst.num_molds + 1):
        for t in range(1, inst.periods + 1):
            terms = [(z, 1)]
            terms += [(pos, -t * coeff) for pos, coeff in _cell_terms(model, cat, m, t)]
            model.add_constraint(f"last_m{m}_t{t}", terms, ">=", 0)
    model.objective = [(z, 1)]
    return model


def build_m3(inst: Instance, cat: PatternCatalog,
             include_late_starts: bool = False) -> IlpModel:
    """Minimize total completion time: every occupied mold-period counts."""
    model = _base_model("m3", inst, cat, include_late_starts)
    _add_contiguity(model, inst, cat)
    objective: dict[int, int] = {}
    for m in range(1, inst.num_molds + 1):
        for t in range(1, inst.periods + 1):
            for pos, coeff in _cell_terms(model, cat, m, t):
                objective[pos] = objective.get(pos, 0) + coeff
    model.objective = sorted(objective.items())
    return model


MODEL_BUILDERS = {
    "m1": build_m1,
    "m2": build_m2,
    "am2": build_am2,
    "m3": build_m3,
}


def model_stats(model: IlpModel) -> dict[str, int]:
    return {
        "variables": len(model.variables),
        "constraints": len(model.constraints),
        "nonzeros": model.num_nonzeros(),
    }


def _expression(terms, names, scale) -> str:
    parts = []
    for idx, (pos, coeff) in enumerate(terms):
        if idx == 0:
            sign = "- " if coeff < 0 else ""
        else:
            sign = "- " if coeff < 0 else "+ "
        magnitude = format_quantity(abs(coeff), scale)
        body = names[pos] if magnitude == "1" else f"{magnitude} {names[pos]}"
        parts.append(sign + body)
    return " ".join(parts)


def export_lp(model: IlpModel) -> str:
    """Render the model in LP text format, deterministically.

    Sections: Minimize, Subject To, Bounds (general integers only),
    Binaries, Generals, End.  Objective coefficients are exact decimals of
    the fixed-point values; constraint data is integral by construction.
    """
    names = [v.name for v in model.variables]
    out = [f"\\ {model.name}: {len(model.variables)} variables, "
           f"{len(model.constraints)} constraints"]
    out.append("Minimize")
    objective = [t for t in model.objective if t[1] != 0]
    if objective:
        out.append(" obj: " + _expression(objective, names, model.objective_scale))
    else:
        out.append(f" obj: 0 {names[0]}")
    out.append("Subject To")
    for con in model.constraints:
        expr = _expression(con.terms, names, 1)
        out.append(f" {con.name}: {expr} {con.sense} {con.rhs}")
    generals = [v for v in model.variables if v.kind == "integer"]
    binaries = [v for v in model.variables if v.kind == "binary"]
    if generals:
        out.append("Bounds")
        out.extend(f" {v.lower} <= {v.name} <= {v.upper}" for v in generals)
    if binaries:
        out.append("Binaries")
        out.extend(f" {v.name}" for v in binaries)
    if generals:
        out.append("Generals")
        out.extend(f" {v.name}" for v in generals)
    out.append("End")
    return "\n".join(out) + "\n"


_NAME_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_")
_SECTIONS = ("minimize", "subject to", "bounds", "binaries", "generals", "end")


def _valid_name(token: str) -> bool:
    return bool(token) and not token[0].isdigit() and set(token) <= _NAME_CHARS


def _valid_number(token: str) -> bool:
    body = token.lstrip("+-")
    if not body:
        return False
    int_part, _, frac_part = body.partition(".")
    return bool(int_part or frac_part) and set(int_part + frac_part) <= set("0123456789")


def _check_linear_expr(tokens: list[str], where: str, errors: list[str]) -> None:
    expect_term = True
    idx = 0
    while idx < len(tokens):
        token = tokens[idx]
        if token in ("+", "-"):
            idx += 1
            if idx >= len(tokens):
                errors.append(f"{where}: dangling sign")
                return
            token = tokens[idx]
        elif not expect_term:
            errors.append(f"{where}: expected '+' or '-' before {token!r}")
            return
        if _valid_number(token):
            idx += 1
            if idx >= len(tokens) or not _valid_name(tokens[idx]):
                errors.append(f"{where}: coefficient without variable")
                return
        elif not _valid_name(token):
            errors.append(f"{where}: bad token {token!r}")
            return
        idx += 1
        expect_term = False
    if expect_term:
        errors.append(f"{where}: empty expression")


def check_lp_grammar(text: str) -> list[str]:
    """Validate the LP subset emitted by export_lp; empty list means clean.

    Checks section order, name and number lexemes, constraint shape
    (name, linear expression, sense, integral or decimal right-hand side),
    and bound lines.  Deliberately independent of the writer: it works on
    the raw character stream.
    """
    errors: list[str] = []
    lines = [
        line.strip() for line in text.splitlines()
        if line.strip() and not line.strip().startswith("\\")
    ]
    section_seq = []
    content: dict[str, list[str]] = {name: [] for name in _SECTIONS}
    current = None
    for line in lines:
        lowered = line.lower()
        if lowered in _SECTIONS:
            section_seq.append(lowered)
            current = lowered
            continue
        if current is None:
            errors.append(f"content before any section: {line!r}")
        else:
            content[current].append(line)

    order = [s for s in _SECTIONS if s in section_seq]
    if section_seq != order:
        errors.append(f"sections out of order or repeated: {section_seq}")
    if "minimize" not in section_seq or "subject to" not in section_seq:
        errors.append("missing Minimize or Subject To section")
    if "end" not in section_seq:
        errors.append("missing End section")
    elif section_seq[-1] != "end":
        errors.append("End is not the last section")

    for line in content["minimize"]:
        label, sep, expr = line.partition(":")
        if not sep or not _valid_name(label.strip()):
            errors.append(f"objective must look like 'obj: <expr>': {line!r}")
            continue
        _check_linear_expr(expr.split(), "objective", errors)

    for line in content["subject to"]:
        label, sep, body = line.partition(":")
        if not sep or not _valid_name(label.strip()):
            errors.append(f"constraint missing name: {line!r}")
            continue
        tokens = body.split()
        sense_positions = [idx for idx, tok in enumerate(tokens) if tok in ("<=", ">=", "=")]
        if len(sense_positions) != 1:
            errors.append(f"constraint needs exactly one sense: {line!r}")
            continue
        cut = sense_positions[0]
        _check_linear_expr(tokens[:cut], f"constraint {label.strip()}", errors)
        rhs = tokens[cut + 1:]
        if len(rhs) != 1 or not _valid_number(rhs[0]):
            errors.append(f"constraint {label.strip()}: bad right-hand side")

    for line in content["bounds"]:
        tokens = line.split()
        shape = (
            len(tokens) == 5
            and tokens[1] == tokens[3] == "<="
            and _valid_number(tokens[0])
            and _valid_name(tokens[2])
            and _valid_number(tokens[4])
        )
        if not shape:
            errors.append(f"bad bounds line: {line!r}")

    for section in ("binaries", "generals"):
        for line in content[section]:
            for token in line.split():
                if not _valid_name(token):
                    errors.append(f"bad variable name in {section}: {token!r}")

    if content["end"]:
        errors.append("End section must be empty")
    return errors
