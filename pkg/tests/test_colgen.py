import random

import pytest

from conftest import make_instance
from netmigrate.colgen import CgSolver, ColumnPool, PricingMode, build_rmp, init_phase, solve_cg
from netmigrate.instance import generate_tiny_instance
from netmigrate.lp import solve_lp
from netmigrate.oracle import all_columns, fewest_shifts, full_lp_value, verify_farkas
from netmigrate.plan import PlanStatus, solve_plan
from netmigrate.pricing import ShiftColumn, reduced_cost


def remote(phi=4, eta_tech=(2, 2)):
    return make_instance([0, 1], {(0, 1): phi}, [[0, 300], [300, 0]], durations=(360, 480), eta_tech=eta_tech)


def test_empty_rmp():
    inst = remote()
    lp, _ = build_rmp(inst, [0], [])
    assert solve_lp(lp).objective == 0


def test_single_column_value():
    inst = remote()
    col = ShiftColumn(0, 360, ((0, 2),))
    lp, _ = build_rmp(inst, [2], [col])
    lp.rhs[1] = 0  # only the lower side is demanded in this hand check
    sol = solve_lp(lp)
    assert sol.objective == pytest.approx(81600) and sol.x[0] == pytest.approx(1)
    lp.rhs[0] = 4
    sol = solve_lp(lp)
    assert sol.objective == pytest.approx(163200) and sol.x[0] == pytest.approx(2)


def test_init_phase_zero_demand():
    inst = remote()
    res = init_phase(inst, [0], ColumnPool(inst))
    assert res.feasible and res.value == 0


def test_init_phase_certificate_for_unstaffed_region():
    inst = remote(eta_tech=(0, 2))
    res = init_phase(inst, [1], ColumnPool(inst))
    assert not res.feasible
    assert verify_farkas(res.duals, inst, [1], all_columns(inst))


def test_init_phase_feasible_when_a_plan_exists():
    inst = remote()
    pool = ColumnPool(inst)
    res = init_phase(inst, [3], pool)
    assert res.feasible and len(pool) > 0
    assert solve_plan(inst, [3]).status is PlanStatus.OPTIMAL


def test_value_on_remote_pair():
    inst = remote()
    pool = ColumnPool(inst)
    assert init_phase(inst, [1], pool).feasible
    res = solve_cg(inst, [1], pool)
    # the relaxation may split a multi-endpoint shift; the integer plan costs two shifts
    assert res.value == pytest.approx(full_lp_value(inst, [1], all_columns(inst)))
    assert res.value <= solve_plan(inst, [1]).cost == 163200


def test_fixpoint_resolve_is_stable():
    inst = remote()
    pool = ColumnPool(inst)
    init_phase(inst, [2], pool)
    first = solve_cg(inst, [2], pool)
    size = len(pool)
    again = solve_cg(inst, [2], pool)
    assert again.value == pytest.approx(first.value) and len(pool) == size and again.columns_generated == 0


def probes(seeds, per=4):
    for seed in seeds:
        inst = generate_tiny_instance(seed)
        rng = random.Random(seed)
        for _ in range(per):
            yield inst, [rng.randint(0, f) for f in inst.phi]


@pytest.mark.parametrize("mode", list(PricingMode))
def test_matches_full_column_lp(mode):
    checked = 0
    for inst, m in probes(range(25)):
        cols = all_columns(inst)
        res = CgSolver(inst, mode).evaluate(m)
        full = full_lp_value(inst, m, cols)
        if not res.feasible:
            assert full is None
            assert verify_farkas(res.duals, inst, m, cols)
            continue
        assert full is not None
        if mode is PricingMode.ORDERED and max(len(s) for s in inst.region_sites) > 2:
            assert res.value >= full - 1e-6
        else:
            assert res.value == pytest.approx(full, rel=1e-9, abs=1e-6)
        # returned duals are feasible for the dual of the full LP
        for c in cols:
            assert reduced_cost(c, res.duals, inst) >= -1e-6 or mode is PricingMode.ORDERED
        checked += 1
    assert checked > 20


def test_hybrid_equals_general_on_small_regions():
    for inst, m in probes(range(60), per=2):
        if max(len(s) for s in inst.region_sites) > 2:
            continue
        a = CgSolver(inst, PricingMode.HYBRID).evaluate(m)
        b = CgSolver(inst, PricingMode.GENERAL).evaluate(m)
        c = CgSolver(inst, PricingMode.ORDERED).evaluate(m)
        assert a.feasible == b.feasible == c.feasible
        if a.feasible:
            assert a.value == pytest.approx(b.value, abs=1e-6)
            assert c.value == pytest.approx(b.value, abs=1e-6)


def test_cache_and_pool_retention():
    inst = generate_tiny_instance(3)
    cg = CgSolver(inst)
    m = list(inst.phi)
    first = cg.evaluate(m)
    assert cg.evaluate(m) is first
    dropped = CgSolver(inst, keep_columns=False)
    other = dropped.evaluate(m)
    assert other.feasible == first.feasible
    if first.feasible:
        assert other.value == pytest.approx(first.value, abs=1e-6)


def test_shift_count_lps_match_enumeration():
    checked = 0
    for inst, m in probes(range(40), per=2):
        cg = CgSolver(inst)
        if not cg.evaluate(m).feasible:
            continue
        cols = all_columns(inst)
        assert cg.shift_count(m).value == pytest.approx(fewest_shifts(inst, m, cols), abs=1e-6)
        for r in range(inst.num_regions):
            exact = fewest_shifts(inst, m, cols, region=r)
            got = cg.region_count(r, m)
            assert exact is not None
            assert got.value == pytest.approx(exact, abs=1e-6)
            # the duals price every column of the region at most 1
            for c in cols:
                if c.region == r:
                    assert reduced_cost(c, got.duals, inst, unit_cost=True) >= -1e-6
        checked += 1
    assert checked > 20


def test_shift_count_needs_a_feasible_window():
    inst = remote(eta_tech=(0, 2))
    with pytest.raises(ValueError):
        CgSolver(inst).shift_count([1])
