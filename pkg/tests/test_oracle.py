import pytest

from conftest import make_instance
from netmigrate.oracle import (OracleLimitError, OracleLimits, WindowOracle, all_columns, enumerate_columns,
                               full_lp_value, solve_exact, verify_farkas, window_cost)
from netmigrate.plan import verify_plan
from netmigrate.pricing import Duals, validate_column


def test_no_circuits_cost_nothing():
    inst = make_instance([0, 1], {}, [[0, 200], [200, 0]])
    res = solve_exact(inst)
    assert res.feasible and res.cost == 0


def test_single_pair(single_pair):
    res = solve_exact(single_pair)
    assert res.feasible and res.cost == 163200 and res.m == [[1]]
    assert verify_plan(res.plans[0], single_pair, res.m[0])


def test_circuit_budget_per_window_counts_circuits():
    inst = make_instance([0, 1], {(0, 1): 2}, [[0, 200], [200, 0]], eta_cir=1)
    assert not solve_exact(inst).feasible
    two = make_instance([0, 1], {(0, 1): 2}, [[0, 200], [200, 0]], eta_cir=1, windows=2)
    res = solve_exact(two)
    assert res.feasible and res.m == [[1], [1]] and res.cost == 2 * 163200


def test_columns_of_single_site_region():
    inst = make_instance([0, 1], {(0, 1): 2}, [[0, 200], [200, 0]], durations=(360,))
    cols = enumerate_columns(inst, 0)
    assert sorted(c.counts for c in cols) == [((0, 1),), ((0, 2),)]
    assert all(validate_column(c, inst) for c in all_columns(inst))


def test_region_without_pairs_has_no_columns():
    inst = make_instance([0, 1, 2], {(0, 1): 1}, [[0, 200, 300], [200, 0, 300], [300, 300, 0]])
    assert enumerate_columns(inst, 2) == []


def test_zero_certificate_is_rejected(single_pair):
    cols = all_columns(single_pair)
    assert not verify_farkas(Duals.zeros(single_pair), single_pair, [1], cols)


def test_certificate_for_unstaffed_region():
    inst = make_instance([0, 1], {(0, 1): 1}, [[0, 200], [200, 0]], eta_tech=(0, 1))
    cols = all_columns(inst)
    assert full_lp_value(inst, [1], cols) is None
    # price each lower-side endpoint at 1 and charge the idle technician row
    d = Duals([1.0, 0.0], [-1.0, 0.0], 0.0)
    assert verify_farkas(d, inst, [1], cols)


def test_window_cost_and_oracle_agree(single_pair):
    assert window_cost(single_pair, [1]) == 163200
    cost, cols = WindowOracle(single_pair).cost([1])
    assert cost == 163200 and len(cols) == 2


def test_limits_are_enforced():
    inst = make_instance([0, 1], {(0, 1): 7}, [[0, 200], [200, 0]])
    with pytest.raises(OracleLimitError):
        solve_exact(inst)
    assert solve_exact(inst, OracleLimits(max_circuits=8)).feasible
