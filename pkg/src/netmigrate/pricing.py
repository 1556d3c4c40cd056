"""Shift columns and the two pricers that generate them.

A column is one technician shift in a region: a duration from the
instance's duration set and a number of endpoints per *side* (a side is a
pair's endpoints at one of its two sites, see :attr:`Instance.sides`).

Both pricers are exact enumerators over site subsets and durations. For a
fixed subset the best allocation is a greedy fill by decreasing dual,
because every endpoint costs the same ``theta`` minutes. Travel for a
subset is the shortest open path through it; passing through extra sites
without migrating there is allowed, which is why subset travel is taken as
a minimum over supersets.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from . import kernels
from .instance import Instance

log = logging.getLogger(__name__)

MAX_REGION_SITES = 12
RC_TOL = 1e-6
MAX_COLUMNS = 10


class RegionTooLarge(ValueError):
    pass


@dataclass(frozen=True, order=True)
class ShiftColumn:
    """A shift pattern; ``counts`` is a sorted tuple of (side, n>0)."""

    region: int
    duration: int
    counts: Tuple[Tuple[int, int], ...]

    @property
    def n_cir(self) -> int:
        return sum(n for _, n in self.counts)

    def sites(self, instance: Instance) -> List[int]:
        return sorted({instance.sides[k][0] for k, _ in self.counts})


@dataclass
class Duals:
    """Row duals of the restricted master: per side, per region, engineer row.

    Coverage duals are >= 0; technician and engineer duals are <= 0.
    """

    cover: List[float]
    tech: List[float]
    eng: float

    @classmethod
    def zeros(cls, instance: Instance) -> "Duals":
        return cls([0.0] * len(instance.sides), [0.0] * instance.num_regions, 0.0)

    def pair_coefficients(self) -> List[float]:
        """Dual weight of one circuit of each pair (both of its sides)."""
        c = self.cover
        return [c[2 * p] + c[2 * p + 1] for p in range(len(c) // 2)]


# -- geometry -----------------------------------------------------------------


@dataclass
class RegionGeometry:
    region: int
    sites: List[int]
    local: Dict[int, int]
    travel: List[List[int]]
    hp: List[int]  # shortest open path through exactly the mask
    eff_general: List[int]  # by local bitmask, pass-throughs allowed
    eff_ordered: List[int]


_GEOMETRY_CACHE: Dict[Tuple[int, int], Tuple[Instance, RegionGeometry]] = {}


def region_geometry(instance: Instance, region: int) -> RegionGeometry:
    key = (id(instance), region)
    hit = _GEOMETRY_CACHE.get(key)
    if hit is not None and hit[0] is instance:
        return hit[1]
    sites = instance.region_sites[region]
    k = len(sites)
    if k > MAX_REGION_SITES:
        raise RegionTooLarge(f"region {region} has {k} sites; pricing supports at most {MAX_REGION_SITES}")
    T = [[instance.T[a][b] for b in sites] for a in sites]
    hp = kernels.subset_path_lengths(T, k)
    gen = kernels.superset_min(hp, k)
    ordd = kernels.superset_min(kernels.ordered_path_lengths(T, k), k)
    geo = RegionGeometry(region, list(sites), {s: i for i, s in enumerate(sites)}, T, hp, gen, ordd)
    if len(_GEOMETRY_CACHE) > 4096:
        _GEOMETRY_CACHE.clear()
    _GEOMETRY_CACHE[key] = (instance, geo)
    return geo


def min_travel(instance: Instance, sites: Sequence[int]) -> int:
    """Shortest open path through ``sites`` (same region), pass-throughs allowed."""
    if not sites:
        return 0
    geo = region_geometry(instance, instance.region_of(sites[0]))
    mask = 0
    for s in sites:
        mask |= 1 << geo.local[s]
    return geo.eff_general[mask]


def _brute_min_travel(instance: Instance, sites: Sequence[int]) -> int:
    region = instance.region_sites[instance.region_of(sites[0])]
    need = set(sites)
    extra = [s for s in region if s not in need]
    T = instance.T
    best = None
    for r in range(len(extra) + 1):
        for add in itertools.combinations(extra, r):
            for perm in itertools.permutations(list(need) + list(add)):
                t = sum(T[a][b] for a, b in zip(perm, perm[1:]))
                if best is None or t < best:
                    best = t
    return best


# -- validity and reduced cost -----------------------------------------------


def validate_column(col: ShiftColumn, instance: Instance) -> bool:
    """Recompute every shift rule from scratch (independent of the pricers)."""
    res = instance.resources
    if col.duration not in res.durations or not 0 <= col.region < instance.num_regions:
        return False
    if not col.counts or list(col.counts) != sorted(col.counts):
        return False
    seen = set()
    for k, n in col.counts:
        if not 0 <= k < len(instance.sides) or k in seen or n <= 0:
            return False
        seen.add(k)
        site, _, p = instance.sides[k]
        if instance.region_of(site) != col.region or n > instance.phi[p]:
            return False
        if instance.is_intra(p) and (k ^ 1) in seen:
            return False
    sites = col.sites(instance)
    if len(instance.region_sites[col.region]) <= 7:
        travel = _brute_min_travel(instance, sites)
    else:
        travel = min_travel(instance, sites)
    return res.theta * col.n_cir + travel <= col.duration


def column_cost(instance: Instance, duration: int, phase_one: bool = False, unit_cost: bool = False) -> float:
    """Objective coefficient of a column: 0 in phase one, 1 when counting shifts, else its cost."""
    if phase_one:
        return 0.0
    if unit_cost:
        return 1.0
    return float(instance.shift_cost(duration))


def reduced_cost(col: ShiftColumn, duals: Duals, instance: Instance, phase_one: bool = False,
                 unit_cost: bool = False) -> float:
    cost = column_cost(instance, col.duration, phase_one, unit_cost)
    gain = sum(n * duals.cover[k] for k, n in col.counts)
    return cost - gain - duals.tech[col.region] - duals.eng


# -- pricers ------------------------------------------------------------------


@dataclass
class PricingInput:
    instance: Instance
    region: int
    duals: Duals
    phase_one: bool = False
    tol: float = RC_TOL
    unit_cost: bool = False
    max_columns: int = MAX_COLUMNS
    geometry: Optional[RegionGeometry] = field(default=None, repr=False)

    def __post_init__(self):
        if self.geometry is None:
            self.geometry = region_geometry(self.instance, self.region)


def _items(inp: PricingInput):
    inst = inp.instance
    geo = inp.geometry
    items = []
    for k in inst.region_sides[inp.region]:
        d = inp.duals.cover[k]
        if d <= 1e-9:
            continue
        site, _, p = inst.sides[k]
        items.append((-d, k, geo.local[site], inst.phi[p], p if inst.is_intra(p) else -1))
    items.sort()
    return items


def _fill(items, mask: int, budget: int) -> Tuple[Tuple[int, int], ...]:
    used = set()
    out = []
    for negd, k, loc, cap, g in items:
        if budget <= 0:
            break
        if not mask >> loc & 1:
            continue
        if g >= 0:
            if g in used:
                continue
            used.add(g)
        n = min(cap, budget)
        out.append((k, n))
        budget -= n
    return tuple(sorted(out))


def _price(inp: PricingInput, travel: List[int]) -> List[ShiftColumn]:
    inst = inp.instance
    res = inst.resources
    geo = inp.geometry
    k = len(geo.sites)
    items = _items(inp)
    if not items or k == 0:
        return []
    durations = list(res.durations)
    costs = [column_cost(inst, d, inp.phase_one, inp.unit_cost) for d in durations]
    const = inp.duals.tech[inp.region] + inp.duals.eng
    rc = kernels.greedy_sweep(
        travel, k,
        [it[2] for it in items], [-it[0] for it in items], [it[3] for it in items], [it[4] for it in items],
        durations, costs, res.theta, const,
    )
    nd = len(durations)
    cand = sorted((v, i // nd, i % nd) for i, v in enumerate(rc) if v < -inp.tol)
    out: List[ShiftColumn] = []
    seen = set()
    for v, mask, d in cand:
        budget = (durations[d] - travel[mask]) // res.theta
        col = ShiftColumn(inp.region, durations[d], _fill(items, mask, budget))
        if col in seen:
            continue
        seen.add(col)
        out.append(col)
        if len(out) >= inp.max_columns:
            break
    return out


def price_general(inp: PricingInput) -> List[ShiftColumn]:
    """Up to ``max_columns`` distinct columns with reduced cost < -tol, best first."""
    return _price(inp, inp.geometry.eff_general)


def price_ordered(inp: PricingInput) -> List[ShiftColumn]:
    """As :func:`price_general` but over paths visiting sites in increasing index order."""
    return _price(inp, inp.geometry.eff_ordered)


def best_reduced_cost(cols: Sequence[ShiftColumn], inp: PricingInput) -> float:
    if not cols:
        return float("inf")
    return min(reduced_cost(c, inp.duals, inp.instance, inp.phase_one, inp.unit_cost) for c in cols)
