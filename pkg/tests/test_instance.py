import pytest

from beamplan.instance import (
    BeamType,
    Instance,
    InstanceDataError,
    InstanceFormatError,
    format_instance,
    format_quantity,
    parse_instance,
    parse_quantity,
    validate_instance,
)

MINIMAL_DOC = """
molds = 10.0
periods = 3

[beam_type]
curing_time = 3
lengths = 6.0
demands = 1
"""


def test_parse_minimal_document():
    inst = parse_instance(MINIMAL_DOC)
    assert inst.num_molds == 1
    assert inst.molds == (10_000,)
    assert inst.periods == 3
    assert inst.num_types == 1
    assert inst.beam_types[0] == BeamType(3, (6_000,), (1,))
    assert inst.unit_scale == 1000


def test_parse_sorts_lengths_with_demands():
    doc = """
    unit_scale = 100
    molds = 12.5, 8
    periods = 4

    [beam_type]
    curing_time = 2
    lengths = 6.0, 4.5
    demands = 3, 0
    """
    inst = parse_instance(doc)
    assert inst.unit_scale == 100
    assert inst.molds == (1250, 800)
    assert inst.beam_types[0].lengths == (450, 600)
    assert inst.beam_types[0].demands == (0, 3)


def test_curing_time_exceeding_horizon_is_rejected():
    doc = MINIMAL_DOC.replace("curing_time = 3", "curing_time = 5")
    with pytest.raises(InstanceDataError, match="curing time 5 exceeds horizon"):
        parse_instance(doc)


def test_duplicate_length_is_rejected():
    doc = """
    molds = 10.0
    periods = 3

    [beam_type]
    curing_time = 1
    lengths = 4.0, 4.0
    demands = 1, 1
    """
    with pytest.raises(InstanceDataError, match="duplicate length 4"):
        parse_instance(doc)


def test_syntax_errors_carry_line_numbers():
    with pytest.raises(InstanceFormatError, match="line 2"):
        parse_instance("molds = 10.0\nnonsense here\nperiods = 1\n")
    with pytest.raises(InstanceFormatError, match="unknown key"):
        parse_instance("molds = 10.0\nperiods = 1\nfrobnicate = 3\n")
    with pytest.raises(InstanceFormatError, match="missing required key 'periods'"):
        parse_instance("molds = 10.0\n\n[beam_type]\ncuring_time = 1\nlengths = 2\ndemands = 1\n")


def test_too_many_fractional_digits_is_an_error_not_rounded():
    doc = MINIMAL_DOC.replace("lengths = 6.0", "lengths = 6.0001")
    with pytest.raises(InstanceFormatError, match="fractional digits"):
        parse_instance(doc)


def test_demanded_length_must_fit_some_mold():
    doc = MINIMAL_DOC.replace("lengths = 6.0", "lengths = 14.2")
    with pytest.raises(InstanceDataError, match="14.2 exceeds every mold"):
        parse_instance(doc)


def test_round_trip_preserves_structure():
    doc = """
    unit_scale = 1000
    molds = 10.0, 12.5, 9.999
    periods = 6

    [beam_type]
    curing_time = 2
    lengths = 6.0, 4.5
    demands = 3, 0

    [beam_type]
    curing_time = 1
    lengths = 3.25
    demands = 2
    """
    first = parse_instance(doc)
    second = parse_instance(format_instance(first, comment="round trip"))
    assert first == second


def test_validate_reports_nonpositive_periods():
    inst = Instance(molds=(10_000,), periods=0,
                    beam_types=(BeamType(1, (6_000,), (1,)),))
    problems = validate_instance(inst)
    assert any("periods must be positive" in p for p in problems)


def test_validate_accepts_zero_demand_instance():
    inst = Instance(molds=(10_000,), periods=2,
                    beam_types=(BeamType(1, (6_000,), (0,)),))
    assert validate_instance(inst) == []


def test_validate_flags_unfittable_demand():
    inst = Instance(molds=(5_000,), periods=2,
                    beam_types=(BeamType(1, (6_000,), (1,)),))
    problems = validate_instance(inst)
    assert len(problems) == 1
    assert "exceeds every mold" in problems[0]


@pytest.mark.parametrize(
    "text,scale,expected",
    [("12", 1000, 12_000), ("12.5", 1000, 12_500), ("0.25", 100, 25),
     (".5", 10, 5), ("7", 1, 7), ("003.120", 1000, 3_120)],
)
def test_parse_quantity(text, scale, expected):
    assert parse_quantity(text, scale) == expected


@pytest.mark.parametrize(
    "value,scale,expected",
    [(12_000, 1000, "12"), (12_500, 1000, "12.5"), (25, 100, "0.25"),
     (5, 10, "0.5"), (7, 1, "7"), (3_120, 1000, "3.12"), (0, 1000, "0")],
)
def test_format_quantity(value, scale, expected):
    assert format_quantity(value, scale) == expected


def test_quantity_round_trip_over_seeded_values():
    import random

    rng = random.Random(7)
    for _ in range(500):
        scale = 10 ** rng.randint(0, 4)
        value = rng.randint(0, 10**7)
        assert parse_quantity(format_quantity(value, scale), scale) == value
