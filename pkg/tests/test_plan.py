import pytest

from beamplan.ilp import build_m1
from beamplan.instance import BeamType, Instance
from beamplan.patterns import Pattern, build_catalog, catalog_from_patterns
from beamplan.plan import (
    IDLE,
    PlanDecodeError,
    ProductionPlan,
    decode,
    empty_plan,
    metrics,
    plan_from_text,
    plan_to_text,
    verify,
)
from beamplan.solver import solve


@pytest.fixture
def toy_catalog(toy_instance):
    return build_catalog(toy_instance, "maximal")


@pytest.fixture
def toy_plan():
    # S1 C C
    return ProductionPlan(((1, 0, 0),))


def test_valid_toy_plan_verifies(toy_instance, toy_catalog, toy_plan):
    assert verify(toy_instance, toy_catalog, toy_plan) == []


def test_continue_in_first_period_is_flagged(toy_instance, toy_catalog):
    plan = ProductionPlan(((0, IDLE, IDLE),))
    problems = verify(toy_instance, toy_catalog, plan)
    assert any("first period" in p for p in problems)


def test_short_continuation_run_is_flagged(toy_instance, toy_catalog):
    plan = ProductionPlan(((1, 0, IDLE),))
    problems = verify(toy_instance, toy_catalog, plan)
    assert any("run cut short" in p and "mold 1, period 3" in p for p in problems)


def test_orphan_continuation_is_flagged(toy_instance, toy_catalog):
    plan = ProductionPlan(((1, 0, 0), ))
    ok = verify(toy_instance, toy_catalog, plan)
    assert ok == []
    orphan = ProductionPlan(((IDLE, 0, IDLE),))
    problems = verify(toy_instance, toy_catalog, orphan)
    assert any("without an unfinished start" in p for p in problems)


def test_capacity_violation_is_flagged():
    inst = Instance(molds=(5_000,), periods=1,
                    beam_types=(BeamType(1, (6_000,), (0,)),))
    cat = catalog_from_patterns(inst, [Pattern(0, (1,))])
    plan = ProductionPlan(((1,),))
    problems = verify(inst, cat, plan)
    assert any("uses 6" in p and "holds 5" in p for p in problems)


def test_overrunning_start_is_flagged(toy_instance, toy_catalog):
    plan = ProductionPlan(((IDLE, 1, 0),))
    problems = verify(toy_instance, toy_catalog, plan)
    assert any("past the horizon" in p for p in problems)
    assert any("demand shortfall" in p for p in problems)


def test_demand_shortfall_is_flagged(toy_instance, toy_catalog):
    plan = empty_plan(1, 3)
    problems = verify(toy_instance, toy_catalog, plan)
    assert problems == [
        "demand shortfall for type 1 length 6: produced 0 of 1"
    ]


def test_metrics_of_toy_plan(toy_instance, toy_catalog, toy_plan):
    scored = metrics(toy_instance, toy_catalog, toy_plan)
    assert scored.total_idle == 12_000
    assert scored.makespan == 3
    assert scored.total_completion == 3
    assert scored.surplus == ((0,),)
    assert scored.demand_met
    assert scored.total_surplus == 0


def test_metrics_of_empty_plan_zero_demand():
    inst = Instance(molds=(10_000,), periods=2,
                    beam_types=(BeamType(1, (6_000,), (0,)),))
    cat = build_catalog(inst, "maximal")
    scored = metrics(inst, cat, empty_plan(1, 2))
    assert (scored.total_idle, scored.makespan, scored.total_completion) == (0, 0, 0)


def test_metrics_counts_surplus(two_length_instance):
    cat = build_catalog(two_length_instance, "maximal")
    i = cat.index_of(Pattern(0, (2, 1)))
    j = cat.index_of(Pattern(0, (3, 0)))
    plan = ProductionPlan(((i, j),))
    scored = metrics(two_length_instance, cat, plan)
    # produced (5, 1) against demand (2, 1)
    assert scored.surplus == ((3, 0),)
    assert scored.total_surplus == 3


def test_metrics_refuses_unverified_plan(toy_instance, toy_catalog):
    with pytest.raises(ValueError, match="does not verify"):
        metrics(toy_instance, toy_catalog, empty_plan(1, 3))


def test_decode_solved_toy(toy_instance, toy_catalog, toy_plan):
    model = build_m1(toy_instance, toy_catalog)
    solution = solve(model)
    assert solution.status == "optimal"
    assert decode(model, solution, toy_catalog) == toy_plan


def test_decode_all_zero_assignment(toy_instance, toy_catalog):
    model = build_m1(toy_instance, toy_catalog)

    class Fake:
        values = (0,) * len(model.variables)

    assert decode(model, Fake(), toy_catalog) == empty_plan(1, 3)


def test_decode_rejects_double_assignment(toy_instance, toy_catalog):
    model = build_m1(toy_instance, toy_catalog)

    class Fake:
        values = (1,) * len(model.variables)

    with pytest.raises(PlanDecodeError):
        decode(model, Fake(), toy_catalog)


def test_plan_text_round_trip(two_length_instance):
    cat = build_catalog(two_length_instance, "maximal")
    i = cat.index_of(Pattern(0, (2, 1)))
    plan = ProductionPlan(((i, IDLE),))
    text = plan_to_text(plan, cat, two_length_instance, instance_label="toy2")
    assert "instance=toy2" in text
    assert "catalog=maximal" in text
    back_plan, back_cat = plan_from_text(text, two_length_instance)
    assert verify(two_length_instance, back_cat, back_plan) == []
    before = metrics(two_length_instance, cat, plan)
    after = metrics(two_length_instance, back_cat, back_plan)
    assert before == after
    # second serialization round-trips byte-identically
    assert plan_to_text(back_plan, back_cat, two_length_instance, "toy2") == \
        plan_to_text(back_plan, back_cat, two_length_instance, "toy2")


def test_plan_text_tokens(toy_instance, toy_catalog, toy_plan):
    text = plan_to_text(toy_plan, toy_catalog, toy_instance)
    grid_lines = [l for l in text.splitlines() if not l.startswith("#")]
    assert grid_lines == ["S1 C C"]
    assert "# pattern 1: type=1 counts=1" in text
