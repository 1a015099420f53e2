import time

import pytest

from beamplan.heuristics import (
    RULES,
    HorizonExhausted,
    RuleSpec,
    maximalize,
    run_priority_rule,
    run_rule,
    run_srh,
)
from beamplan.ilp import build_m1
from beamplan.instance import BeamType, Instance
from beamplan.patterns import Pattern, build_catalog, catalog_from_patterns, is_maximal
from beamplan.plan import ProductionPlan, metrics, produced_counts, verify
from beamplan.solver import brute_force_schedule, make_bound, solve


def test_rule_names_cover_the_six_combinations():
    assert set(RULES) == {"sctsl", "sctll", "sctal", "lctsl", "lctll", "lctal"}
    assert RULES["sctal"] == RuleSpec("shortest-first", "alternate")
    assert RULES["lctll"] == RuleSpec("longest-first", "largest-first")


def test_two_molds_one_period_hand_trace():
    inst = Instance(molds=(10_000, 10_000), periods=1,
                    beam_types=(BeamType(1, (6_000,), (2,)),))
    plan, cat = run_priority_rule(inst, RULES["sctsl"])
    assert plan.cells == ((1,), (1,))
    assert cat.patterns[1] == Pattern(0, (1,))


def test_curing_priority_orders_types():
    inst = Instance(
        molds=(10_000,),
        periods=4,
        beam_types=(
            BeamType(1, (6_000,), (1,)),
            BeamType(2, (5_000,), (1,)),
        ),
    )
    short_first, cat_s = run_priority_rule(inst, RULES["sctsl"])
    long_first, cat_l = run_priority_rule(inst, RULES["lctsl"])
    first_short = cat_s.patterns[short_first.cells[0][0]]
    first_long = cat_l.patterns[long_first.cells[0][0]]
    assert first_short.type_index == 0
    assert first_long.type_index == 1


def test_zero_demand_plans_all_idle():
    inst = Instance(molds=(10_000,), periods=2,
                    beam_types=(BeamType(1, (6_000,), (0,)),))
    plan, cat = run_priority_rule(inst, RULES["sctll"])
    assert all(cell == -1 for row in plan.cells for cell in row)


def test_phase1_zero_surplus_and_verifies():
    inst = Instance(
        molds=(9_000, 12_000),
        periods=5,
        beam_types=(
            BeamType(2, (3_000, 4_000), (5, 2)),
            BeamType(1, (2_500,), (4,)),
        ),
    )
    for rule in RULES.values():
        plan, cat = run_priority_rule(inst, rule)
        assert verify(inst, cat, plan) == []
        scored = metrics(inst, cat, plan)
        assert scored.total_surplus == 0
        assert scored.demand_met


def test_length_priorities_differ_in_packing():
    inst = Instance(molds=(10_000,), periods=1,
                    beam_types=(BeamType(1, (2_000, 3_000), (2, 2)),))
    shortest, cat_s = run_priority_rule(inst, RULES["sctsl"])
    largest, cat_g = run_priority_rule(inst, RULES["sctll"])
    alternate, cat_a = run_priority_rule(inst, RULES["sctal"])
    # shortest-first: both 2.0 first, then both 3.0 -> (2, 2)
    assert cat_s.patterns[shortest.cells[0][0]].counts == (2, 2)
    # largest-first: both 3.0, then both 2.0 -> (2, 2) as well (all fit)
    assert cat_g.patterns[largest.cells[0][0]].counts == (2, 2)
    # alternate: one 2.0, both 3.0, then remaining 2.0
    assert cat_a.patterns[alternate.cells[0][0]].counts == (2, 2)


def test_alternate_priority_order_when_capacity_binds():
    inst = Instance(molds=(7_000,), periods=2,
                    beam_types=(BeamType(1, (2_000, 3_000, 4_000), (1, 1, 1)),))
    plan, cat = run_priority_rule(inst, RULES["sctal"])
    # visit order 2.0, 4.0, 3.0: 2+4 placed, 3.0 no longer fits in period 1
    first = cat.patterns[plan.cells[0][0]]
    assert first.counts == (1, 0, 1)


def test_rule_skips_type_with_no_fitting_length():
    inst = Instance(
        molds=(5_000, 9_000),
        periods=2,
        beam_types=(
            BeamType(1, (8_000,), (1,)),
            BeamType(1, (4_000,), (2,)),
        ),
    )
    # mold 1 cannot host type 1; the rule falls through to type 2 there
    plan, cat = run_priority_rule(inst, RULES["lctsl"])
    assert verify(inst, cat, plan) == []
    produced = produced_counts(cat, plan, inst)
    assert produced == [[1], [2]]


def test_horizon_exhausted_raises():
    inst = Instance(molds=(10_000,), periods=1,
                    beam_types=(BeamType(1, (6_000,), (3,)),))
    with pytest.raises(HorizonExhausted):
        run_priority_rule(inst, RULES["sctsl"])


def test_rule_refuses_starts_overrunning_horizon():
    # the 2-period type can only start in period 1; SCTSL burns that slot
    # on the short type and must refuse a period-2 start that would overrun
    inst = Instance(
        molds=(10_000, 10_000),
        periods=2,
        beam_types=(
            BeamType(1, (6_000,), (2,)),
            BeamType(2, (5_000,), (1,)),
        ),
    )
    with pytest.raises(HorizonExhausted):
        run_priority_rule(inst, RULES["sctsl"])
    # LCTSL starts the 2-period type first and finishes everything
    plan, cat = run_priority_rule(inst, RULES["lctsl"])
    assert verify(inst, cat, plan) == []


def test_maximalize_greedy_trace():
    inst = Instance(molds=(10_000,), periods=1,
                    beam_types=(BeamType(1, (3_000, 6_000), (0, 1)),))
    cat = catalog_from_patterns(inst, [Pattern(0, (0, 1))])
    plan = ProductionPlan(((1,),))
    grown, grown_cat = maximalize(inst, cat, plan)
    assert grown_cat.patterns[grown.cells[0][0]].counts == (1, 1)


def test_maximalize_fixed_point():
    inst = Instance(molds=(9_000,), periods=1,
                    beam_types=(BeamType(1, (3_000,), (3,)),))
    plan, cat = run_priority_rule(inst, RULES["sctsl"])
    once_plan, once_cat = maximalize(inst, cat, plan)
    twice_plan, twice_cat = maximalize(inst, once_cat, once_plan)
    assert once_plan == twice_plan
    assert once_cat == twice_cat


def test_maximalize_preserves_timing_and_grows_coverage():
    inst = Instance(
        molds=(11_000,),
        periods=4,
        beam_types=(BeamType(2, (2_000, 5_000), (1, 2)),),
    )
    plan, cat = run_priority_rule(inst, RULES["sctll"])
    grown, grown_cat = maximalize(inst, cat, plan)
    assert verify(inst, grown_cat, grown) == []
    before = produced_counts(cat, plan, inst)
    after = produced_counts(grown_cat, grown, inst)
    for c in range(inst.num_types):
        for k in range(inst.beam_types[c].num_lengths):
            assert after[c][k] >= before[c][k]
    # starts keep their cells
    assert [(m, t) for m, t, _ in grown.starts()] == [(m, t) for m, t, _ in plan.starts()]
    for m, t, i in grown.starts():
        assert is_maximal(grown_cat.patterns[i], inst.molds[m], inst)


def test_maximalize_cap_surplus_variant():
    inst = Instance(molds=(10_000,), periods=1,
                    beam_types=(BeamType(1, (3_000, 6_000), (1, 1)),))
    cat = catalog_from_patterns(inst, [Pattern(0, (1, 1))])
    plan = ProductionPlan(((1,),))
    capped, capped_cat = maximalize(inst, cat, plan, cap_surplus=True)
    assert capped_cat.patterns[capped.cells[0][0]].counts == (1, 1)


def test_two_phase_rule_dominates_exact_optimum():
    inst = Instance(
        molds=(9_000, 7_000),
        periods=4,
        beam_types=(
            BeamType(2, (3_000, 4_000), (3, 1)),
            BeamType(1, (2_000,), (2,)),
        ),
    )
    cat = build_catalog(inst, "all-feasible")
    m1 = solve(build_m1(inst, cat))
    assert m1.status == "optimal"
    for rule in RULES.values():
        plan, rule_cat = run_rule(inst, rule)
        scored = metrics(inst, rule_cat, plan)
        assert scored.total_idle >= m1.objective_value


def test_rule_runtime_grows_polynomially():
    def build(factor):
        return Instance(
            molds=(10_000, 9_000),
            periods=40 * factor,
            beam_types=(
                BeamType(2, (2_000, 3_000), (30 * factor, 20 * factor)),
                BeamType(1, (2_500,), (25 * factor,)),
            ),
        )

    timings = []
    for factor in (1, 2, 4):
        inst = build(factor)
        start = time.perf_counter()
        plan, cat = run_rule(inst, RULES["sctal"])
        timings.append(time.perf_counter() - start)
        assert verify(inst, cat, plan) == []
    # doubling demand may not blow past the polynomial shape; allow a wide
    # constant to keep the check robust on slow machines
    assert timings[2] <= max(0.5, 50 * timings[0])


def test_srh_on_trivial_instance_matches_exact(toy_instance):
    result = run_srh(toy_instance, "m1")
    assert result.status == "optimal"
    assert result.solution.objective_value == 12_000
    assert verify(toy_instance, result.catalog, result.plan) == []


def test_srh_reduced_model_infeasible_on_adversarial_toy():
    # qc-maximal keeps only the (1,1) pattern on the 7.0 molds, which cannot
    # deliver three 3.0 beams in one period; the full catalog can
    inst = Instance(
        molds=(7_000, 7_000),
        periods=1,
        beam_types=(BeamType(1, (3_000, 4_000), (3, 1)),),
    )
    result = run_srh(inst, "m1")
    assert result.status == "infeasible-reduced"
    full_cat = build_catalog(inst, "all-feasible")
    plan, value = brute_force_schedule(inst, full_cat, "idle")
    assert plan is not None  # the full problem is feasible
    full = solve(build_m1(inst, full_cat),
                 bound=make_bound("demand", build_m1(inst, full_cat), inst, full_cat))
    assert full.status == "optimal"
    assert full.objective_value == value


def test_srh_value_is_upper_bound():
    inst = Instance(
        molds=(10_000,),
        periods=4,
        beam_types=(BeamType(1, (3_000, 4_000), (4, 2)),),
    )
    result = run_srh(inst, "m1")
    assert result.status == "optimal"
    cat = build_catalog(inst, "all-feasible")
    model = build_m1(inst, cat)
    exact = solve(model, bound=make_bound("demand", model, inst, cat))
    assert result.solution.objective_value >= exact.objective_value
    scored = metrics(inst, result.catalog, result.plan)
    assert scored.total_idle == result.solution.objective_value
