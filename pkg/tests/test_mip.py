import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netmigrate.lp import LpModel
from netmigrate.mip import MipModel, MipStatus, NodeLimitError, branch_select, solve_mip


def knapsack():
    lp = LpModel()
    x = lp.add_variable(-3.0, 0, 1)
    y = lp.add_variable(-2.0, 0, 1)
    lp.add_constraint({x: 1, y: 1}, "<=", 1)
    return MipModel(lp, {x, y})


def test_knapsack():
    sol = solve_mip(knapsack())
    assert sol.status is MipStatus.OPTIMAL
    assert sol.objective == -3 and sol.gap == 0 and sol.x[:2] == [1.0, 0.0]


def test_infeasible():
    lp = LpModel()
    x = lp.add_variable(1.0, 0, 10)
    lp.add_constraint({x: 2}, "=", 3)  # no integer solution
    sol = solve_mip(MipModel(lp, {x}))
    assert sol.status is MipStatus.INFEASIBLE and not sol.has_incumbent


def test_lazy_separator_matches_explicit_constraint():
    def build():
        lp = LpModel()
        a = lp.add_variable(-4.0, 0, 3)
        b = lp.add_variable(-3.0, 0, 3)
        lp.add_constraint({a: 2, b: 3}, "<=", 9)
        return MipModel(lp, {a, b})

    calls = []

    def sep(x):
        calls.append(list(x))
        return [({0: 1.0}, "<=", 0.0)] if x[0] >= 1 - 1e-9 else []

    lazy = solve_mip(build(), lazy_separator=sep)
    explicit = build()
    explicit.lp.add_constraint({0: 1.0}, "<=", 0.0)
    ref = solve_mip(explicit)
    assert lazy.x[0] == 0 and lazy.objective == ref.objective == -9
    assert lazy.cuts_added == 1 and calls


def test_separator_must_cut():
    with pytest.raises(RuntimeError):
        solve_mip(knapsack(), lazy_separator=lambda x: [({0: 1.0}, "<=", 5.0)])


def test_bad_gap_and_marks():
    with pytest.raises(ValueError):
        solve_mip(knapsack(), rel_gap=1.0)
    with pytest.raises(ValueError):
        MipModel(LpModel(), {0})


def test_node_limit():
    lp = LpModel()
    xs = [lp.add_variable(-1.0, 0, 1) for _ in range(6)]
    lp.add_constraint({x: 2 for x in xs}, "<=", 5)
    with pytest.raises(NodeLimitError):
        solve_mip(MipModel(lp, set(xs)), node_limit=1)


@pytest.mark.parametrize("x,expected", [((0.5, 0.9), 0), ((0.9, 0.5), 1), ((0.5, 0.5), 0), ((1.0, 2.0), None)])
def test_branch_select(x, expected):
    assert branch_select(x) == expected


@given(st.data())
@settings(max_examples=40, deadline=None)
def test_matches_enumeration(data):
    n = 5
    lp = LpModel()
    for _ in range(n):
        lp.add_variable(data.draw(st.integers(-5, 5)), 0, 2)
    for _ in range(data.draw(st.integers(1, 3))):
        lp.add_constraint({j: data.draw(st.integers(-5, 5)) for j in range(n)},
                          data.draw(st.sampled_from(["<=", ">="])), data.draw(st.integers(-5, 5)))
    rows = [(dict(r), s, b) for r, s, b in zip(lp.rows, lp.senses, lp.rhs)]
    obj = list(lp.obj)
    sol = solve_mip(MipModel(lp, set(range(n))))
    best = None
    for pt in itertools.product(range(3), repeat=n):
        ok = all((sum(a * pt[j] for j, a in r.items()) <= b) if s == "<=" else
                 (sum(a * pt[j] for j, a in r.items()) >= b) for r, s, b in rows)
        if ok:
            v = sum(c * v for c, v in zip(obj, pt))
            best = v if best is None else min(best, v)
    if best is None:
        assert sol.status is MipStatus.INFEASIBLE
    else:
        assert sol.status is MipStatus.OPTIMAL
        assert sol.objective == pytest.approx(best, abs=1e-6)
        assert sol.bound <= sol.objective + 1e-9


@given(st.data())
@settings(max_examples=30, deadline=None)
def test_bound_never_decreases(data):
    n = 4
    lp = LpModel()
    for _ in range(n):
        lp.add_variable(data.draw(st.integers(-5, 5)), 0, 3)
    lp.add_constraint({j: data.draw(st.integers(1, 5)) for j in range(n)}, "<=", data.draw(st.integers(3, 9)))
    sol = solve_mip(MipModel(lp, set(range(n))))
    tr = sol.bound_trace
    assert all(b >= a for a, b in zip(tr, tr[1:]))
