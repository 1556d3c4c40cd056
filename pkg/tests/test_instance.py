import json

import pytest

from conftest import make_instance
from netmigrate.instance import (InstanceError, cluster_regions, eunetworks, generate_instance,
                                 generate_tiny_instance, instance_from_dict, lognormal_params, travel_time)


def test_shift_cost_combined_rate():
    inst = make_instance([0, 1], {(0, 1): 1}, [[0, 10], [10, 0]])
    assert inst.resources.combined_rate() == 13600
    assert inst.shift_cost(360) == 81600
    assert inst.shift_cost(480) == 108800


def test_sides_layout():
    inst = make_instance([0, 0, 1], {(0, 1): 2, (1, 2): 1}, [[0, 5, 9], [5, 0, 9], [9, 9, 0]])
    assert inst.sides == [(0, 1, 0), (1, 0, 0), (1, 2, 1), (2, 1, 1)]
    assert inst.side_of(1, 0) == 1 and inst.side_of(2, 1) == 3
    assert inst.is_intra(0) and not inst.is_intra(1)
    assert inst.region_sides == [[0, 1, 2], [3]]
    assert inst.endpoints_per_site() == [2, 3, 1]


@pytest.mark.parametrize("pairs,T,msg", [
    ({(0, 0): 1}, [[0, 1], [1, 0]], "self-pair"),
    ({(0, 1): 0}, [[0, 1], [1, 0]], ">= 1"),
    ({(0, 1): 1}, [[0, 1], [2, 0]], "not symmetric"),
    ({(0, 1): 1}, [[1, 1], [1, 0]], "diagonal"),
])
def test_validation_errors(pairs, T, msg):
    with pytest.raises(InstanceError, match=msg):
        make_instance([0, 1], pairs, T)


def test_bad_durations():
    with pytest.raises(InstanceError):
        make_instance([0, 1], {(0, 1): 1}, [[0, 1], [1, 0]], durations=(480, 360))


def test_json_roundtrip(tmp_path):
    inst = make_instance([0, 1, 1], {(0, 1): 2, (1, 2): 1}, [[0, 3, 4], [3, 0, 5], [4, 5, 0]], windows=2)
    doc = json.loads(inst.dumps())
    again = instance_from_dict(doc)
    assert again.dumps() == inst.dumps()


def test_malformed_document():
    with pytest.raises(InstanceError):
        instance_from_dict({"sites": []})


def test_travel_time_rounding():
    coords = [(0.0, 0.0), (50.0, 0.0)]
    assert travel_time(coords, 0, 1) == 38  # 37.5 minutes rounds half-up
    assert travel_time(coords, 1, 0) == 38


def test_cluster_diameter_bound():
    coords = [(0, 0), (50, 0), (100, 0), (150, 0)]
    regions = cluster_regions(coords, threshold=80)
    assert regions == [0, 0, 1, 1]


def test_eunetworks_regions():
    topo = eunetworks()
    regions = cluster_regions(topo.coords)
    sizes = [regions.count(r) for r in set(regions)]
    assert len(topo.coords) == 15
    assert max(regions) + 1 == 11
    assert max(sizes) == 4


def test_lognormal_moments():
    m, s = lognormal_params(5.0, 2.5)
    import math
    mean = math.exp(m + s * s / 2)
    var = (math.exp(s * s) - 1) * math.exp(2 * m + s * s)
    assert mean == pytest.approx(5.0)
    assert math.sqrt(var) == pytest.approx(2.5)


def test_generate_deterministic_and_consistent():
    topo = eunetworks()
    a = generate_instance(topo, 5, 2.5, seed=7)
    b = generate_instance(topo, 5, 2.5, seed=7)
    assert a.dumps() == b.dumps()
    assert a.num_windows == 3 and a.resources.eta_cir == 30
    assert all(phi >= 1 for phi in a.phi)
    assert generate_instance(topo, 5, 2.5, seed=8).dumps() != a.dumps()


def test_tiny_instances_within_oracle_range():
    for seed in range(20):
        inst = generate_tiny_instance(seed)
        assert inst.num_sites <= 6 and sum(inst.phi) <= 6 and inst.num_windows <= 2
        assert max(len(s) for s in inst.region_sites) <= 4
