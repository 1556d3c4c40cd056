import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_instance
from netmigrate.colgen import build_rmp
from netmigrate.lp import solve_lp
from netmigrate.oracle import enumerate_columns
from netmigrate.pricing import (Duals, PricingInput, RegionTooLarge, ShiftColumn, best_reduced_cost,
                                price_general, price_ordered, reduced_cost, validate_column)


def remote_pair(phi=30, durations=(360,), theta=20):
    return make_instance([0, 1], {(0, 1): phi}, [[0, 300], [300, 0]], durations=durations, theta=theta)


def test_reduced_cost_zero_duals():
    inst = remote_pair()
    col = ShiftColumn(0, 360, ((0, 1),))
    assert reduced_cost(col, Duals.zeros(inst), inst) == 81600


def test_reduced_cost_sign_of_tech_dual():
    inst = remote_pair()
    d = Duals.zeros(inst)
    d.tech[0] = -81600
    assert reduced_cost(ShiftColumn(0, 360, ()), d, inst) == 163200


def test_basic_column_prices_to_zero():
    inst = remote_pair(phi=2)
    col = ShiftColumn(0, 360, ((0, 2),))
    other = ShiftColumn(1, 360, ((1, 2),))
    lp, _ = build_rmp(inst, [2], [col, other])
    sol = solve_lp(lp)
    nsides = len(inst.sides)
    duals = Duals(sol.duals[:nsides], sol.duals[nsides:nsides + 2], sol.duals[-1])
    assert sol.x[0] == pytest.approx(1.0)
    assert reduced_cost(col, duals, inst) == pytest.approx(0.0, abs=1e-6)


def test_single_site_zero_duals_prices_nothing():
    inst = remote_pair()
    assert price_general(PricingInput(inst, 0, Duals.zeros(inst))) == []


def test_single_site_fills_to_capacity():
    inst = remote_pair()
    d = Duals.zeros(inst)
    d.cover[0] = 100000
    cols = price_general(PricingInput(inst, 0, d))
    assert cols[0] == ShiftColumn(0, 360, ((0, 18),))
    assert reduced_cost(cols[0], d, inst) == 81600 - 1800000
    assert price_ordered(PricingInput(inst, 0, d)) == cols


def two_site_region():
    # sites 0 and 1 share a region but are 400 minutes apart; site 2 is elsewhere
    T = [[0, 400, 500], [400, 0, 500], [500, 500, 0]]
    return make_instance([0, 0, 1], {(0, 2): 30, (1, 2): 30}, T)


def test_two_far_sites_cap_endpoints():
    inst = two_site_region()
    cols = enumerate_columns(inst, 0)
    two_site = [c for c in cols if len(c.sites(inst)) == 2]
    assert two_site and max(c.n_cir for c in two_site) == (480 - 400) // 20
    d = Duals.zeros(inst)
    d.cover[0] = d.cover[2] = 50000
    best = price_general(PricingInput(inst, 0, d))[0]
    assert len(best.sites(inst)) == 1 and best.n_cir == 24


def test_region_too_large():
    n = 13
    T = [[0 if i == j else 1 for j in range(n)] for i in range(n)]
    inst = make_instance([0] * n, {(0, 1): 1}, T)
    with pytest.raises(RegionTooLarge):
        price_general(PricingInput(inst, 0, Duals.zeros(inst)))


def test_validate_column_rules():
    inst = make_instance([0, 0], {(0, 1): 3}, [[0, 10], [10, 0]])
    assert validate_column(ShiftColumn(0, 360, ((0, 3),)), inst)
    assert not validate_column(ShiftColumn(0, 360, ((0, 4),)), inst)          # above circuit count
    assert not validate_column(ShiftColumn(0, 360, ((0, 1), (1, 1))), inst)  # both ends of one circuit pair
    assert not validate_column(ShiftColumn(0, 300, ((0, 1),)), inst)          # not a shift length
    assert not validate_column(ShiftColumn(0, 360, ()), inst)                 # empty


def random_region_instance(rng, k):
    n = k + 1
    T = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            T[i][j] = T[j][i] = rng.randint(5, 150)
    pairs = {}
    for _ in range(rng.randint(1, 6)):
        s, t = sorted(rng.sample(range(n), 2))
        pairs[(s, t)] = pairs.get((s, t), 0) + 1
    return make_instance([0] * k + [1], pairs, T, theta=rng.choice([20, 30, 60]),
                         durations=rng.choice([(120, 240), (240, 360)]))


def random_duals(inst, rng):
    return Duals([rng.choice([0.0, rng.uniform(0, 60000)]) for _ in inst.sides],
                 [-rng.choice([0.0, rng.uniform(0, 20000)]) for _ in range(inst.num_regions)],
                 -rng.choice([0.0, rng.uniform(0, 10000)]))


@given(st.integers(0, 10**6), st.integers(1, 4))
@settings(max_examples=80, deadline=None)
def test_pricers_exact_against_enumeration(seed, k):
    rng = random.Random(seed)
    inst = random_region_instance(rng, k)
    d = random_duals(inst, rng)
    cols = enumerate_columns(inst, 0)
    truth = min((reduced_cost(c, d, inst) for c in cols), default=float("inf"))
    inp = PricingInput(inst, 0, d)
    gen = price_general(inp)
    ordd = price_ordered(inp)
    for c in gen + ordd:
        assert validate_column(c, inst)
        assert reduced_cost(c, d, inst) < -1e-6
    assert [reduced_cost(c, d, inst) for c in gen] == sorted(reduced_cost(c, d, inst) for c in gen)
    if truth < -1e-6:
        assert best_reduced_cost(gen, inp) == pytest.approx(truth, rel=1e-9, abs=1e-6)
    else:
        assert gen == []
    assert best_reduced_cost(gen, inp) <= best_reduced_cost(ordd, inp) + 1e-9
    if k <= 2:
        assert best_reduced_cost(ordd, inp) == pytest.approx(best_reduced_cost(gen, inp), abs=1e-6)


def test_general_beats_ordered_on_four_sites():
    # the cheap tour is 0-2-1-3 (non-monotone in index); monotone orders are long
    far = 200
    T = [[0, far, 10, far, far],
         [far, 0, 10, 10, far],
         [10, 10, 0, far, far],
         [far, 10, far, 0, far],
         [far, far, far, far, 0]]
    inst = make_instance([0, 0, 0, 0, 1], {(0, 4): 2, (1, 4): 2, (2, 4): 2, (3, 4): 2}, T, durations=(240,), theta=20)
    d = Duals.zeros(inst)
    for p in range(4):
        d.cover[2 * p] = 30000
    inp = PricingInput(inst, 0, d)
    g = best_reduced_cost(price_general(inp), inp)
    o = best_reduced_cost(price_ordered(inp), inp)
    assert g < o - 1e-6


@given(st.data())
@settings(max_examples=200, deadline=None)
def test_greedy_allocation_is_optimal(data):
    """For a fixed site set, filling by decreasing dual is optimal under caps and one orientation per pair.

    Both sides of a pair share the pair's circuit count as cap, which is
    what makes taking the better side first safe.
    """
    from netmigrate.pricing import _fill
    items = []
    k = 0
    for g in range(data.draw(st.integers(1, 4))):
        cap = data.draw(st.integers(1, 4))
        both = data.draw(st.booleans())
        for _ in range(2 if both else 1):
            items.append((-data.draw(st.integers(1, 100)), k, 0, cap, g if both else -1))
            k += 1
    items.sort()
    budget = data.draw(st.integers(0, 10))
    got = _fill(items, 1, budget)
    value = {it[1]: -it[0] for it in items}
    gain = sum(value[k] * n for k, n in got)
    best = 0
    for vec in itertools.product(*[range(it[3] + 1) for it in items]):
        if sum(vec) > budget:
            continue
        groups = [it[4] for it, v in zip(items, vec) if v > 0 and it[4] >= 0]
        if len(groups) != len(set(groups)):
            continue
        best = max(best, sum(-it[0] * v for it, v in zip(items, vec)))
    assert gain == best
