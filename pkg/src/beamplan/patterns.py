"""Casting patterns: enumeration, derived quantities, and the indexed catalog.

A pattern is a beam type plus a multiplicity vector over that type's
lengths; it is the unit of assignment to a (mold, period) start.  Index 0
of every catalog is reserved for the continuation marker that occupies a
mold while an earlier start is still curing.
"""

from __future__ import annotations

from dataclasses import dataclass

from .instance import Instance, format_quantity

#: catalog index of the continuation marker
CONTINUATION = 0

DEFAULT_MAX_PATTERNS = 200_000


class CatalogSizeError(RuntimeError):
    """Pattern enumeration exceeded the configured ceiling."""


class IncompatiblePatternError(ValueError):
    """Pattern does not fit the mold it was paired with."""


@dataclass(frozen=True)
class Pattern:
    """(beam type, count per canonical length) — one casting of one mold."""

    type_index: int
    counts: tuple[int, ...]

    def distinct_lengths(self) -> int:
        return sum(1 for a in self.counts if a > 0)

    def total_beams(self) -> int:
        return sum(self.counts)


def used_capacity(pattern: Pattern, inst: Instance) -> int:
    """Total mold length the pattern occupies, in base units."""
    lengths = inst.beam_types[pattern.type_index].lengths
    return sum(l * a for l, a in zip(lengths, pattern.counts))


def pattern_duration(pattern: Pattern, inst: Instance) -> int:
    """Consecutive periods the pattern holds its mold (the type's curing time)."""
    return inst.beam_types[pattern.type_index].curing_time


def idle_cost(pattern: Pattern, mold_capacity: int, inst: Instance) -> int:
    """Unused mold length times curing duration, in base units.

    Raises IncompatiblePatternError when the pattern does not fit.
    """
    used = used_capacity(pattern, inst)
    if used > mold_capacity:
        raise IncompatiblePatternError(
            f"pattern uses {format_quantity(used, inst.unit_scale)} but the mold "
            f"holds {format_quantity(mold_capacity, inst.unit_scale)}"
        )
    return pattern_duration(pattern, inst) * (mold_capacity - used)


def is_maximal(pattern: Pattern, mold_capacity: int, inst: Instance) -> bool:
    """True when no further beam of the pattern's own type fits the mold."""
    used = used_capacity(pattern, inst)
    if used > mold_capacity:
        return False
    lengths = inst.beam_types[pattern.type_index].lengths
    return all(used + l > mold_capacity for l in lengths)


def _pattern_sort_key(pattern: Pattern) -> tuple:
    # deterministic order everywhere: type ascending, larger counts first
    return (pattern.type_index, tuple(-a for a in pattern.counts))


def _enumerate_counts(lengths: tuple[int, ...], capacity: int, ceiling: int) -> list[tuple[int, ...]]:
    """All count vectors with total length <= capacity, excluding all-zero."""
    found: list[tuple[int, ...]] = []
    prefix = [0] * len(lengths)

    def rec(k: int, remaining: int) -> None:
        if k == len(lengths):
            if any(prefix):
                found.append(tuple(prefix))
                if len(found) > ceiling:
                    raise CatalogSizeError(
                        f"more than {ceiling} patterns; use the qc-maximal catalog"
                    )
            return
        top = remaining // lengths[k]
        for a in range(top, -1, -1):
            prefix[k] = a
            rec(k + 1, remaining - a * lengths[k])
        prefix[k] = 0

    rec(0, capacity)
    return found


def enumerate_maximal_patterns(inst: Instance, mold_index: int,
                               max_patterns: int = DEFAULT_MAX_PATTERNS) -> list[Pattern]:
    """All patterns maximal with respect to the given mold, every beam type.

    Output is deterministic: type ascending, then lexicographically larger
    counts first.  Empty when no single beam fits the mold.
    """
    capacity = inst.molds[mold_index]
    result: list[Pattern] = []
    for c, bt in enumerate(inst.beam_types):
        for counts in _enumerate_counts(bt.lengths, capacity, max_patterns):
            p = Pattern(c, counts)
            if is_maximal(p, capacity, inst):
                result.append(p)
    result.sort(key=_pattern_sort_key)
    return result


@dataclass(frozen=True)
class PatternCatalog:
    """Indexed pattern set with precomputed quantities and membership sets.

    ``patterns[0]`` is None: the continuation marker.  ``idle[i][m]`` is the
    idle cost of pattern i in mold m, or None when the pattern does not fit;
    ``idle[0][m]`` is 0 for every mold.  ``compatible[m]`` lists the pattern
    indices the model may start in mold m (mode-dependent, see
    build_catalog), and ``by_curing[j-1]`` the indices with curing time j.
    """

    mode: str
    patterns: tuple[Pattern | None, ...]
    used: tuple[int, ...]
    durations: tuple[int, ...]
    idle: tuple[tuple[int | None, ...], ...]
    compatible: tuple[tuple[int, ...], ...]
    by_curing: tuple[tuple[int, ...], ...]

    @property
    def size(self) -> int:
        """Number of real patterns (continuation marker excluded)."""
        return len(self.patterns) - 1

    @property
    def max_curing(self) -> int:
        return len(self.by_curing)

    def beam_count(self, index: int, c: int, k: int) -> int:
        """Beams of type c and length index k that pattern ``index`` includes."""
        p = self.patterns[index]
        if p is None or p.type_index != c:
            return 0
        return p.counts[k]

    def index_of(self, pattern: Pattern) -> int | None:
        for i, p in enumerate(self.patterns):
            if p == pattern:
                return i
        return None

    def dump(self, inst: Instance) -> str:
        """One pattern per line: ``index; type; counts; u; E; molds=[...]``."""
        lines = []
        for i in range(1, len(self.patterns)):
            p = self.patterns[i]
            molds = [m + 1 for m in range(len(self.compatible)) if i in set(self.compatible[m])]
            lines.append(
                f"{i}; {p.type_index + 1}; "
                f"({','.join(str(a) for a in p.counts)}); "
                f"{format_quantity(self.used[i], inst.unit_scale)}; "
                f"{self.durations[i]}; "
                f"molds={molds}"
            )
        return "\n".join(lines) + ("\n" if lines else "")


def _assemble(inst: Instance, patterns: list[Pattern], mode: str,
              compatible: list[list[int]] | None = None) -> PatternCatalog:
    """Build the catalog tables for an ordered, deduplicated pattern list.

    ``compatible`` overrides the default capacity-based Q(m); entries are
    indices into ``patterns`` offset by one (0 stays the continuation marker).
    """
    used = [0]
    durations = [0]
    for p in patterns:
        used.append(used_capacity(p, inst))
        durations.append(pattern_duration(p, inst))

    idle: list[tuple[int | None, ...]] = []
    for i in range(len(patterns) + 1):
        row: list[int | None] = []
        for cap in inst.molds:
            if i == CONTINUATION:
                row.append(0)
            elif used[i] <= cap:
                row.append(durations[i] * (cap - used[i]))
            else:
                row.append(None)
        idle.append(tuple(row))

    if compatible is None:
        compatible = [
            [i for i in range(1, len(patterns) + 1) if used[i] <= cap]
            for cap in inst.molds
        ]

    by_curing = [
        tuple(i for i in range(1, len(patterns) + 1) if durations[i] == j)
        for j in range(1, inst.max_curing + 1)
    ]

    return PatternCatalog(
        mode=mode,
        patterns=(None, *patterns),
        used=tuple(used),
        durations=tuple(durations),
        idle=tuple(idle),
        compatible=tuple(tuple(q) for q in compatible),
        by_curing=tuple(by_curing),
    )


def catalog_from_patterns(inst: Instance, patterns: list[Pattern],
                          mode: str = "explicit") -> PatternCatalog:
    """Catalog over an explicit pattern list; Q(m) is the plain capacity test."""
    ordered = sorted(set(patterns), key=_pattern_sort_key)
    return _assemble(inst, ordered, mode)


def build_catalog(inst: Instance, mode: str = "maximal",
                  max_patterns: int = DEFAULT_MAX_PATTERNS) -> PatternCatalog:
    """Enumerate the pattern set for a whole instance.

    ``maximal``: union over molds of the per-mold maximal patterns; Q(m)
    contains exactly the patterns maximal for mold m, so the same pattern
    can be startable in one mold and absent from another even if it fits.
    ``all-feasible``: every pattern fitting the longest mold; Q(m) by
    capacity.  ``qc-maximal``: see select_qc_maximal.

    Raises CatalogSizeError when enumeration exceeds ``max_patterns``.
    """
    if mode == "qc-maximal":
        return select_qc_maximal(inst, max_patterns=max_patterns)

    if mode == "all-feasible":
        longest = max(inst.molds)
        patterns: list[Pattern] = []
        for c, bt in enumerate(inst.beam_types):
            patterns.extend(
                Pattern(c, counts)
                for counts in _enumerate_counts(bt.lengths, longest, max_patterns)
            )
            if len(patterns) > max_patterns:
                raise CatalogSizeError(
                    f"more than {max_patterns} patterns; use the qc-maximal catalog"
                )
        patterns.sort(key=_pattern_sort_key)
        return _assemble(inst, patterns, mode)

    if mode != "maximal":
        raise ValueError(f"unknown catalog mode {mode!r}")

    per_mold = [enumerate_maximal_patterns(inst, m, max_patterns) for m in range(inst.num_molds)]
    merged = sorted({p for group in per_mold for p in group}, key=_pattern_sort_key)
    if len(merged) > max_patterns:
        raise CatalogSizeError(
            f"more than {max_patterns} patterns; use the qc-maximal catalog"
        )
    position = {p: i + 1 for i, p in enumerate(merged)}
    compatible = [sorted(position[p] for p in group) for group in per_mold]
    return _assemble(inst, merged, mode, compatible)


def select_qc_maximal(inst: Instance, *, distinct_filter: bool = True,
                      max_patterns: int = DEFAULT_MAX_PATTERNS) -> PatternCatalog:
    """Reduced pattern set for the size-reduction heuristic.

    Per beam type: among the patterns maximal on the shortest mold, keep
    those covering the most distinct lengths; as long as some positively
    demanded length of the type is uncovered, admit patterns of the next
    lower distinct-length count that cover it.  A demanded length too long
    for the shortest mold is covered from the smallest mold that fits it.

    ``distinct_filter=False`` keeps every shortest-mold maximal pattern
    instead (the looser reading); coverage completion still applies.

    Raises IncompatiblePatternError if a demanded length fits no mold.
    """
    shortest = min(range(inst.num_molds), key=lambda m: (inst.molds[m], m))
    base = enumerate_maximal_patterns(inst, shortest, max_patterns)

    selected: list[Pattern] = []
    for c, bt in enumerate(inst.beam_types):
        of_type = [p for p in base if p.type_index == c]
        demanded = [k for k, d in enumerate(bt.demands) if d > 0]
        covered: set[int] = set()
        if of_type:
            if distinct_filter:
                best = max(p.distinct_lengths() for p in of_type)
                chosen = [p for p in of_type if p.distinct_lengths() == best]
                uncovered = [
                    k for k in demanded
                    if bt.lengths[k] <= inst.molds[shortest]
                    and not any(p.counts[k] > 0 for p in chosen)
                ]
                level = best - 1
                while uncovered and level >= 1:
                    extra = [
                        p for p in of_type
                        if p.distinct_lengths() == level
                        and any(p.counts[k] > 0 for k in uncovered)
                    ]
                    chosen.extend(extra)
                    uncovered = [
                        k for k in uncovered
                        if not any(p.counts[k] > 0 for p in chosen)
                    ]
                    level -= 1
            else:
                chosen = list(of_type)
            selected.extend(chosen)
            covered = {k for p in chosen for k, a in enumerate(p.counts) if a > 0}

        for k in demanded:
            if k in covered or bt.lengths[k] <= inst.molds[shortest]:
                continue
            fitting = [m for m in range(inst.num_molds) if bt.lengths[k] <= inst.molds[m]]
            if not fitting:
                raise IncompatiblePatternError(
                    f"beam type {c + 1}: demanded length "
                    f"{format_quantity(bt.lengths[k], inst.unit_scale)} fits no mold"
                )
            fallback = min(fitting, key=lambda m: (inst.molds[m], m))
            candidates = [
                p for p in enumerate_maximal_patterns(inst, fallback, max_patterns)
                if p.type_index == c and p.counts[k] > 0
            ]
            best = max(p.distinct_lengths() for p in candidates)
            selected.extend(p for p in candidates if p.distinct_lengths() == best)

    ordered = sorted(set(selected), key=_pattern_sort_key)
    if len(ordered) > max_patterns:
        raise CatalogSizeError(
            f"more than {max_patterns} patterns after reduction"
        )
    return _assemble(inst, ordered, "qc-maximal")
