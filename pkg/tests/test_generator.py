import pytest

from beamplan.generator import (
    GeneratorConfig,
    GeneratorConfigError,
    PRESETS,
    generate,
    generate_preset,
)
from beamplan.instance import validate_instance
from beamplan.patterns import build_catalog
from beamplan.solver import ORACLE_GUARD


def test_same_seed_same_instance():
    config = GeneratorConfig(seed=11)
    assert generate(config) == generate(config)


def test_different_seeds_differ():
    assert generate(GeneratorConfig(seed=1)) != generate(GeneratorConfig(seed=2))


def test_generated_instances_validate():
    for seed in range(30):
        for preset in PRESETS.values():
            from dataclasses import replace

            inst = generate(replace(preset, seed=seed))
            assert validate_instance(inst) == []


def test_zero_demand_range_yields_zero_demand():
    config = GeneratorConfig(seed=5, demand=(0, 0))
    inst = generate(config)
    assert inst.total_demand == 0
    assert validate_instance(inst) == []


def test_positive_range_never_yields_all_zero_demand():
    for seed in range(40):
        inst = generate(GeneratorConfig(seed=seed, demand=(0, 2)))
        assert inst.total_demand > 0


def test_auto_horizon_covers_longest_curing():
    config = GeneratorConfig(seed=3, demand=(0, 0), curing_time=(3, 3))
    inst = generate(config)
    assert inst.periods >= 3


def test_explicit_periods_respected():
    config = GeneratorConfig(seed=3, periods=7)
    assert generate(config).periods == 7


def test_impossible_length_range_raises():
    config = GeneratorConfig(seed=1, mold_capacity=(3, 4), beam_length=(5, 6))
    with pytest.raises(GeneratorConfigError, match="exceeds the largest mold"):
        generate(config)


def test_impossible_curing_range_raises():
    config = GeneratorConfig(seed=1, periods=2, curing_time=(3, 4))
    with pytest.raises(GeneratorConfigError, match="horizon"):
        generate(config)


def test_bad_ranges_raise():
    with pytest.raises(GeneratorConfigError):
        GeneratorConfig(seed=0, demand=(4, 2))
    with pytest.raises(GeneratorConfigError):
        GeneratorConfig(seed=0, mold_count=(0, 1))


def test_tiny_preset_within_oracle_guard():
    for seed in range(25):
        inst = generate_preset("tiny", seed)
        assert inst.num_molds <= 2
        assert inst.periods <= 4
        assert inst.num_types <= 2
        assert all(bt.num_lengths <= 2 for bt in inst.beam_types)
        assert all(d <= 3 for bt in inst.beam_types for d in bt.demands)
        cat = build_catalog(inst, "all-feasible")
        space = 1
        for m in range(inst.num_molds):
            space *= (len(cat.compatible[m]) + 2) ** inst.periods
        assert space <= ORACLE_GUARD


def test_tiny_preset_is_deterministic():
    assert generate_preset("tiny", 9) == generate_preset("tiny", 9)
