"""Problem data model: molds, horizon, beam types, and the instance file format.

All lengths are stored as non-negative integers counting a base unit
(``unit_scale`` base units per input unit, default 1000, i.e. millimeters
for meter-valued input).  Every capacity comparison downstream is exact
integer arithmetic; no tolerance parameter exists anywhere in the core.
"""

from __future__ import annotations

from dataclasses import dataclass


class InstanceFormatError(ValueError):
    """Syntax error in an instance document, carrying the offending line."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class InstanceDataError(ValueError):
    """Semantic error: the document parses but violates an instance invariant."""


def parse_quantity(text: str, scale: int, *, line: int | None = None) -> int:
    """Convert a decimal literal to an exact count of base units.

    Inputs with more fractional digits than ``scale`` permits are an error,
    never rounded: ``parse_quantity("4.25", 10)`` raises.
    """
    text = text.strip()
    if not text:
        raise InstanceFormatError("empty numeric field", line)
    sign = 1
    body = text
    if body[0] in "+-":
        if body[0] == "-":
            sign = -1
        body = body[1:]
    int_part, _, frac_part = body.partition(".")
    if not int_part and not frac_part:
        raise InstanceFormatError(f"malformed number {text!r}", line)
    int_part = int_part or "0"
    if not int_part.isdigit() or (frac_part and not frac_part.isdigit()):
        raise InstanceFormatError(f"malformed number {text!r}", line)
    frac_digits = len(frac_part)
    max_digits = len(str(scale)) - 1
    if frac_digits > max_digits:
        raise InstanceFormatError(
            f"{text!r} has {frac_digits} fractional digits; unit_scale {scale} "
            f"permits at most {max_digits}",
            line,
        )
    frac_value = int(frac_part or "0") * (scale // (10**frac_digits))
    return sign * (int(int_part) * scale + frac_value)


def format_quantity(value: int, scale: int) -> str:
    """Render a base-unit count as the shortest exact decimal string."""
    sign = "-" if value < 0 else ""
    whole, rem = divmod(abs(value), scale)
    if rem == 0:
        return f"{sign}{whole}"
    digits = len(str(scale)) - 1
    frac = str(rem).rjust(digits, "0").rstrip("0")
    return f"{sign}{whole}.{frac}"


def _is_power_of_ten(n: int) -> bool:
    while n >= 10 and n % 10 == 0:
        n //= 10
    return n == 1


@dataclass(frozen=True)
class BeamType:
    """One beam type: curing time in periods plus its length/demand table.

    ``lengths`` is strictly increasing (canonical order); every k-index in
    the toolkit refers to this order.  Entries of ``demands`` align with
    ``lengths`` and may be zero.
    """

    curing_time: int
    lengths: tuple[int, ...]
    demands: tuple[int, ...]

    @property
    def num_lengths(self) -> int:
        return len(self.lengths)


@dataclass(frozen=True)
class Instance:
    """Immutable problem instance; safe to share across concurrent runs."""

    molds: tuple[int, ...]
    periods: int
    beam_types: tuple[BeamType, ...]
    unit_scale: int = 1000

    @property
    def num_molds(self) -> int:
        return len(self.molds)

    @property
    def num_types(self) -> int:
        return len(self.beam_types)

    @property
    def max_curing(self) -> int:
        return max(bt.curing_time for bt in self.beam_types)

    @property
    def total_demand(self) -> int:
        return sum(d for bt in self.beam_types for d in bt.demands)

    def demanded_pairs(self) -> list[tuple[int, int]]:
        """(type_index, length_index) pairs with positive demand."""
        return [
            (c, k)
            for c, bt in enumerate(self.beam_types)
            for k, d in enumerate(bt.demands)
            if d > 0
        ]


def validate_instance(inst: Instance) -> list[str]:
    """Return human-readable invariant violations; empty list means valid.

    Violations are data, not faults: callers decide whether to raise.
    """
    problems: list[str] = []
    if inst.unit_scale < 1 or not _is_power_of_ten(inst.unit_scale):
        problems.append(f"unit_scale must be a positive power of ten, got {inst.unit_scale}")
    if inst.num_molds < 1:
        problems.append("at least one mold is required")
    if inst.periods < 1:
        problems.append("periods must be positive")
    for m, cap in enumerate(inst.molds):
        if cap < 0:
            problems.append(f"mold {m + 1} has negative capacity")
    if inst.num_types < 1:
        problems.append("at least one beam type is required")
    max_mold = max(inst.molds, default=0)
    for c, bt in enumerate(inst.beam_types):
        label = f"beam type {c + 1}"
        if bt.curing_time < 1:
            problems.append(f"{label}: curing_time must be positive")
        elif inst.periods >= 1 and bt.curing_time > inst.periods:
            problems.append(
                f"{label}: curing time {bt.curing_time} exceeds horizon {inst.periods}"
            )
        if len(bt.lengths) < 1:
            problems.append(f"{label}: needs at least one length")
        if len(bt.lengths) != len(bt.demands):
            problems.append(
                f"{label}: {len(bt.lengths)} lengths but {len(bt.demands)} demands"
            )
            continue
        for k, length in enumerate(bt.lengths):
            if length <= 0:
                problems.append(
                    f"{label}: length #{k + 1} must be positive "
                    f"({format_quantity(length, inst.unit_scale)})"
                )
        if any(a >= b for a, b in zip(bt.lengths, bt.lengths[1:])):
            problems.append(f"{label}: lengths must be strictly increasing")
        for k, (length, demand) in enumerate(zip(bt.lengths, bt.demands)):
            if demand < 0:
                problems.append(f"{label}: demand #{k + 1} is negative")
            if demand > 0 and length > max_mold:
                problems.append(
                    f"{label}: demanded length "
                    f"{format_quantity(length, inst.unit_scale)} exceeds every mold"
                )
    return problems


_TOP_KEYS = ("unit_scale", "molds", "periods")
_TYPE_KEYS = ("curing_time", "lengths", "demands")


def parse_instance(text: str) -> Instance:
    """Parse an instance document.

    Grammar (UTF-8, line oriented)::

        # comment
        unit_scale = 1000        # optional, base units per input unit
        molds = 10.0, 12.5
        periods = 6

        [beam_type]
        curing_time = 2
        lengths = 6.0, 4.5
        demands = 3, 0

    Lengths inside a type are canonically re-sorted ascending along with
    their demands; duplicate lengths are rejected.  Raises
    InstanceFormatError for syntax problems (with line numbers) and
    InstanceDataError when a parsed document violates an instance invariant.
    """
    top: dict[str, tuple[str, int]] = {}
    sections: list[dict[str, tuple[str, int]]] = []
    current: dict[str, tuple[str, int]] | None = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        if stripped.startswith("["):
            if stripped != "[beam_type]":
                raise InstanceFormatError(f"unknown section {stripped!r}", lineno)
            current = {}
            sections.append(current)
            continue
        key, eq, value = (part.strip() for part in stripped.partition("="))
        if not eq or not key:
            raise InstanceFormatError(f"expected 'key = value', got {stripped!r}", lineno)
        target, allowed = (top, _TOP_KEYS) if current is None else (current, _TYPE_KEYS)
        if key not in allowed:
            where = "beam_type section" if current is not None else "document header"
            raise InstanceFormatError(f"unknown key {key!r} in {where}", lineno)
        if key in target:
            raise InstanceFormatError(f"duplicate key {key!r}", lineno)
        target[key] = (value, lineno)

    def need(table: dict[str, tuple[str, int]], key: str, where: str) -> tuple[str, int]:
        if key not in table:
            raise InstanceFormatError(f"missing required key {key!r} in {where}")
        return table[key]

    def parse_int(value: str, lineno: int, what: str) -> int:
        try:
            return int(value)
        except ValueError:
            raise InstanceFormatError(f"{what} must be an integer, got {value!r}", lineno)

    scale = 1000
    if "unit_scale" in top:
        value, lineno = top["unit_scale"]
        scale = parse_int(value, lineno, "unit_scale")
        if scale < 1 or not _is_power_of_ten(scale):
            raise InstanceFormatError(
                f"unit_scale must be a positive power of ten, got {scale}", lineno
            )

    molds_text, molds_line = need(top, "molds", "document header")
    molds = tuple(
        parse_quantity(field, scale, line=molds_line)
        for field in molds_text.split(",")
    )
    periods_text, periods_line = need(top, "periods", "document header")
    periods = parse_int(periods_text, periods_line, "periods")

    if not sections:
        raise InstanceFormatError("no [beam_type] sections found")

    beam_types = []
    for index, section in enumerate(sections, start=1):
        curing_text, curing_line = need(section, "curing_time", f"beam_type {index}")
        curing = parse_int(curing_text, curing_line, "curing_time")
        lengths_text, lengths_line = need(section, "lengths", f"beam_type {index}")
        lengths = [
            parse_quantity(field, scale, line=lengths_line)
            for field in lengths_text.split(",")
        ]
        demands_text, demands_line = need(section, "demands", f"beam_type {index}")
        demands = [
            parse_int(field.strip(), demands_line, "demand")
            for field in demands_text.split(",")
        ]
        if len(lengths) != len(demands):
            raise InstanceFormatError(
                f"beam_type {index}: {len(lengths)} lengths but {len(demands)} demands",
                demands_line,
            )
        seen: set[int] = set()
        for length in lengths:
            if length in seen:
                raise InstanceDataError(
                    f"beam type {index}: duplicate length "
                    f"{format_quantity(length, scale)}"
                )
            seen.add(length)
        order = sorted(range(len(lengths)), key=lambda k: lengths[k])
        beam_types.append(
            BeamType(
                curing_time=curing,
                lengths=tuple(lengths[k] for k in order),
                demands=tuple(demands[k] for k in order),
            )
        )

    inst = Instance(
        molds=molds,
        periods=periods,
        beam_types=tuple(beam_types),
        unit_scale=scale,
    )
    problems = validate_instance(inst)
    if problems:
        raise InstanceDataError("; ".join(problems))
    return inst


def format_instance(inst: Instance, *, comment: str | None = None) -> str:
    """Serialize an instance in the canonical document form.

    Parsing the result yields a structurally identical Instance.
    """
    lines = []
    if comment:
        for row in comment.splitlines():
            lines.append(f"# {row}")
    lines.append(f"unit_scale = {inst.unit_scale}")
    lines.append(
        "molds = " + ", ".join(format_quantity(c, inst.unit_scale) for c in inst.molds)
    )
    lines.append(f"periods = {inst.periods}")
    for bt in inst.beam_types:
        lines.append("")
        lines.append("[beam_type]")
        lines.append(f"curing_time = {bt.curing_time}")
        lines.append(
            "lengths = "
            + ", ".join(format_quantity(v, inst.unit_scale) for v in bt.lengths)
        )
        lines.append("demands = " + ", ".join(str(d) for d in bt.demands))
    return "\n".join(lines) + "\n"
