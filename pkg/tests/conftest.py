import pytest

from netmigrate.instance import Instance, Network, Resources, Site


def make_instance(regions, pairs, T, *, eta_tech=None, eta_cir=30, eta_eng=3, alpha_eng=5, theta=20,
                  durations=(360, 480), windows=1, name="hand"):
    """Hand-built instance: ``regions[i]`` is site i's region, ``pairs`` maps (s, t) to circuits."""
    num_regions = max(regions) + 1
    if eta_tech is None:
        eta_tech = (2,) * num_regions
    sites = tuple(Site(i, r) for i, r in enumerate(regions))
    res = Resources(tuple(eta_tech), eta_cir, eta_eng, alpha_eng, theta, 10800, 14000, tuple(durations), windows)
    return Instance(Network(sites, dict(pairs), tuple(tuple(row) for row in T)), res, name=name)


@pytest.fixture
def single_pair():
    """Two far-apart sites in different regions sharing one circuit."""
    return make_instance([0, 1], {(0, 1): 1}, [[0, 200], [200, 0]])
