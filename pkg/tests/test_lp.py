import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netmigrate.lp import LpModel, LpSession, LpStatus, solve_lp


def test_single_bound_and_dual():
    m = LpModel()
    x = m.add_variable(1.0)
    m.add_constraint({x: 1.0}, ">=", 3)
    sol = solve_lp(m)
    assert sol.optimal and sol.x == [3.0] and sol.duals == [1.0] and sol.objective == 3.0


def test_unbounded():
    m = LpModel()
    m.add_variable(-1.0)
    assert solve_lp(m).status is LpStatus.UNBOUNDED


def test_infeasible():
    m = LpModel()
    x = m.add_variable(0.0)
    m.add_constraint({x: 1.0}, ">=", 1)
    m.add_constraint({x: 1.0}, "<=", 0)
    assert solve_lp(m).status is LpStatus.INFEASIBLE


def test_le_row_dual_is_nonpositive():
    m = LpModel()
    x = m.add_variable(-1.0)
    m.add_constraint({x: 1.0}, "<=", 4)
    sol = solve_lp(m)
    assert sol.objective == -4 and sol.duals[0] == -1.0


def test_add_column_changes_optimum():
    m = LpModel()
    x = m.add_variable(5.0)
    m.add_constraint({x: 1.0}, ">=", 2)
    s = LpSession(m)
    assert s.solve().objective == 10
    s.add_column(1.0, {0: 1.0})
    sol = s.solve()
    assert sol.objective == 2 and sol.duals == [1.0]


def test_bound_override_and_rhs_change():
    m = LpModel()
    x = m.add_variable(1.0, 0, 10)
    m.add_constraint({x: 1.0}, ">=", 2)
    s = LpSession(m)
    assert s.solve(lb=[5], ub=[10]).objective == 5
    assert s.solve().objective == 2
    s.set_rhs(0, 7)
    assert s.solve().objective == 7
    assert s.solve(lb=[8], ub=[7]).status is LpStatus.INFEASIBLE


def test_rejects_bad_input():
    m = LpModel()
    with pytest.raises(ValueError):
        m.add_constraint({0: 1.0}, ">=", 1)
    m.add_variable()
    with pytest.raises(ValueError):
        m.add_constraint({0: 1.0}, "<", 1)
    with pytest.raises(ValueError):
        m.add_column(1.0, [1.0])


@given(st.data())
@settings(max_examples=60, deadline=None)
def test_strong_duality_and_sign_convention(data):
    """Random covering/packing LPs: primal = dual objective, duals have the documented signs."""
    n = data.draw(st.integers(1, 4))
    rows = data.draw(st.integers(1, 4))
    m = LpModel()
    for _ in range(n):
        m.add_variable(data.draw(st.integers(0, 9)), 0, 5)
    for _ in range(rows):
        coeffs = {j: data.draw(st.integers(-3, 3)) for j in range(n)}
        m.add_constraint(coeffs, data.draw(st.sampled_from(["<=", ">="])), data.draw(st.integers(-4, 6)))
    sol = solve_lp(m)
    if not sol.optimal:
        assert sol.status is LpStatus.INFEASIBLE
        return
    for i, s in enumerate(m.senses):
        assert (sol.duals[i] >= 0) if s == ">=" else (sol.duals[i] <= 0)
    # with box bounds, reduced costs d_j = c_j - A_j^T y; dual objective b^T y + sum(min(d_j*l, d_j*u))
    dual_obj = sum(y * b for y, b in zip(sol.duals, m.rhs))
    for j in range(n):
        d = m.obj[j] - sum(sol.duals[i] * m.rows[i].get(j, 0.0) for i in range(rows))
        dual_obj += min(d * m.lb[j], d * m.ub[j])
    assert math.isclose(dual_obj, sol.objective, abs_tol=1e-6)
    for i in range(rows):
        act = m.row_activity(i, sol.x)
        assert act >= m.rhs[i] - 1e-7 if m.senses[i] == ">=" else act <= m.rhs[i] + 1e-7
