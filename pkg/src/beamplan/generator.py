"""Seeded synthetic instance generation for tests and benchmark sweeps.

The generator is a documented stand-in for factory data: integer-valued
capacities, lengths, and demands drawn from configured ranges, with an
automatic horizon sized from demand volume against total mold capacity.
The tiny preset additionally guarantees the brute-force oracle guard.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from fractions import Fraction

from .instance import BeamType, Instance, validate_instance
from .patterns import build_catalog
from .solver import ORACLE_GUARD


class GeneratorConfigError(ValueError):
    """The configured ranges cannot produce a valid instance."""


@dataclass(frozen=True)
class GeneratorConfig:
    """Ranges are inclusive; capacities and lengths are in whole input units.

    ``periods=None`` sizes the horizon automatically as
    ceil(slack * sum_c curing_c * demand-volume_c / total mold capacity),
    never below the largest curing time.  When every drawn demand is zero
    but the range allows positive ones, one entry is redrawn positive so
    seeded suites stay meaningful; a [0, 0] demand range still yields
    zero-demand instances.
    """

    seed: int
    mold_count: tuple[int, int] = (2, 3)
    mold_capacity: tuple[int, int] = (8, 12)
    type_count: tuple[int, int] = (2, 3)
    curing_time: tuple[int, int] = (1, 3)
    lengths_per_type: tuple[int, int] = (1, 3)
    beam_length: tuple[int, int] = (2, 6)
    demand: tuple[int, int] = (0, 4)
    periods: int | None = None
    slack: Fraction = Fraction(2)
    unit_scale: int = 1000

    def __post_init__(self):
        for name in ("mold_count", "mold_capacity", "type_count", "curing_time",
                     "lengths_per_type", "beam_length", "demand"):
            lo, hi = getattr(self, name)
            if lo > hi or lo < 0:
                raise GeneratorConfigError(f"empty or negative range for {name}: [{lo}, {hi}]")
        if self.mold_count[0] < 1 or self.type_count[0] < 1:
            raise GeneratorConfigError("need at least one mold and one beam type")
        if self.lengths_per_type[0] < 1 or self.beam_length[0] < 1:
            raise GeneratorConfigError("lengths must be positive")
        if self.curing_time[0] < 1:
            raise GeneratorConfigError("curing times must be positive")
        if self.periods is not None and self.periods < 1:
            raise GeneratorConfigError("periods must be positive")


def generate(config: GeneratorConfig) -> Instance:
    """Draw one instance; identical seeds yield identical instances."""
    rng = random.Random(config.seed)
    scale = config.unit_scale

    num_molds = rng.randint(*config.mold_count)
    molds = tuple(
        rng.randint(*config.mold_capacity) * scale for _ in range(num_molds)
    )
    longest = max(molds)

    max_length = min(config.beam_length[1], longest // scale)
    if config.beam_length[0] > max_length:
        raise GeneratorConfigError(
            f"every length in [{config.beam_length[0]}, {config.beam_length[1]}] "
            f"exceeds the largest mold capacity {longest // scale}"
        )

    curing_cap = config.curing_time[1]
    if config.periods is not None:
        curing_cap = min(curing_cap, config.periods)
        if config.curing_time[0] > curing_cap:
            raise GeneratorConfigError(
                f"curing times start at {config.curing_time[0]} but the horizon "
                f"is {config.periods} period(s)"
            )

    num_types = rng.randint(*config.type_count)
    beam_types = []
    for _ in range(num_types):
        curing = rng.randint(config.curing_time[0], curing_cap)
        available = list(range(config.beam_length[0], max_length + 1))
        wanted = rng.randint(*config.lengths_per_type)
        lengths = sorted(rng.sample(available, min(wanted, len(available))))
        demands = [rng.randint(*config.demand) for _ in lengths]
        beam_types.append(
            BeamType(
                curing_time=curing,
                lengths=tuple(v * scale for v in lengths),
                demands=tuple(demands),
            )
        )

    if config.demand[1] > 0 and all(d == 0 for bt in beam_types for d in bt.demands):
        c = rng.randrange(num_types)
        k = rng.randrange(beam_types[c].num_lengths)
        demands = list(beam_types[c].demands)
        demands[k] = rng.randint(1, config.demand[1])
        beam_types[c] = replace(beam_types[c], demands=tuple(demands))

    max_curing = max(bt.curing_time for bt in beam_types)
    if config.periods is not None:
        periods = config.periods
    else:
        work = sum(
            bt.curing_time * sum(d * l for d, l in zip(bt.demands, bt.lengths))
            for bt in beam_types
        )
        auto = config.slack * work / sum(molds)
        periods = max(max_curing, -(-auto.numerator // auto.denominator), 1)

    inst = Instance(
        molds=molds,
        periods=periods,
        beam_types=tuple(beam_types),
        unit_scale=scale,
    )
    problems = validate_instance(inst)
    if problems:
        raise GeneratorConfigError(
            "generated instance is invalid: " + "; ".join(problems)
        )
    return inst


TINY = GeneratorConfig(
    seed=0,
    mold_count=(1, 2),
    mold_capacity=(4, 8),
    type_count=(1, 2),
    curing_time=(1, 3),
    lengths_per_type=(1, 2),
    beam_length=(2, 8),
    demand=(0, 3),
    periods=3,
)

SMALL = GeneratorConfig(
    seed=0,
    mold_count=(2, 3),
    mold_capacity=(8, 12),
    type_count=(2, 3),
    curing_time=(1, 3),
    lengths_per_type=(1, 3),
    beam_length=(2, 6),
    demand=(0, 4),
    slack=Fraction(3, 2),
)

MEDIUM = GeneratorConfig(
    seed=0,
    mold_count=(3, 4),
    mold_capacity=(10, 16),
    type_count=(3, 4),
    curing_time=(1, 4),
    lengths_per_type=(2, 4),
    beam_length=(2, 8),
    demand=(0, 6),
    slack=Fraction(3, 2),
)

PRESETS = {"tiny": TINY, "small": SMALL, "medium": MEDIUM}


def generate_preset(name: str, seed: int, max_attempts: int = 500) -> Instance:
    """Instantiate a preset; the tiny preset is kept inside the oracle guard.

    Tiny instances redraw deterministically (seed, attempt) until the
    brute-force search space over the all-feasible catalog fits the guard,
    with the horizon varied between 2 and 4 periods.
    """
    if name not in PRESETS:
        raise GeneratorConfigError(f"unknown preset {name!r}")
    if name != "tiny":
        return generate(replace(PRESETS[name], seed=seed))

    for attempt in range(max_attempts):
        salt = random.Random(f"tiny:{seed}:{attempt}").getrandbits(32)
        config = replace(TINY, seed=salt, periods=2 + (salt % 3))
        inst = generate(config)
        cat = build_catalog(inst, "all-feasible")
        space = 1
        for m in range(inst.num_molds):
            space *= (len(cat.compatible[m]) + 2) ** inst.periods
        if space <= ORACLE_GUARD:
            return inst
    raise GeneratorConfigError(
        f"no tiny instance within the oracle guard after {max_attempts} attempts"
    )
