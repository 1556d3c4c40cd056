"""Exact minimum-cost plan for one window's migration counts.

A plan is a set of technician shifts. Regions only interact through the
engineer cap (total number of shifts), so each region is solved on its own
for every shift count ``k`` and the per-region profiles are combined with a
small knapsack DP.

Within a region a shift is described by a *type*: the set of sites it may
work at and its duration. Its endpoint capacity follows from the travel
through those sites. For a multiset of ``k`` types, feasibility is an
integral transportation problem (shifts supply endpoints to sides), after
fixing, per shift, which orientation of each intra-region pair it may
serve. The search enumerates multisets in a fixed order with cost and
capacity pruning.
"""

from __future__ import annotations

import enum
import itertools
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from . import kernels
from .instance import Instance
from .pricing import RegionGeometry, region_geometry

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Visit:
    site: int
    start: int
    end: int
    counts: Tuple[Tuple[int, int], ...] = ()  # (pair index, endpoints)


@dataclass(frozen=True)
class TechShift:
    region: int
    tech: int
    duration: int
    visits: Tuple[Visit, ...]

    def sort_key(self):
        first = self.visits[0].site if self.visits else -1
        return (self.region, self.duration, first,
                tuple((v.site, v.start, v.end, v.counts) for v in self.visits))


@dataclass
class Plan:
    shifts: List[TechShift] = field(default_factory=list)
    cost: int = 0

    def region_counts(self, num_regions: int) -> List[int]:
        """Number of shifts per region."""
        out = [0] * num_regions
        for sh in self.shifts:
            out[sh.region] += 1
        return out

    def to_dict(self, instance: Instance) -> dict:
        return {
            "cost_cents": self.cost,
            "shifts": [
                {
                    "region": sh.region,
                    "tech": sh.tech,
                    "duration_min": sh.duration,
                    "visits": [
                        {
                            "site": v.site,
                            "start_min": v.start,
                            "end_min": v.end,
                            "counts": [{"pair": list(instance.pairs[p]), "n": n} for p, n in v.counts],
                        }
                        for v in sh.visits
                    ],
                }
                for sh in self.shifts
            ],
        }


def plan_from_dict(doc: dict, instance: Instance) -> Plan:
    shifts = []
    for sd in doc["shifts"]:
        visits = tuple(
            Visit(int(v["site"]), int(v["start_min"]), int(v["end_min"]),
                  tuple((instance.pair_index[tuple(sorted(c["pair"]))], int(c["n"])) for c in v["counts"]))
            for v in sd["visits"]
        )
        shifts.append(TechShift(int(sd["region"]), int(sd.get("tech", 0)), int(sd["duration_min"]), visits))
    return Plan(shifts, int(doc["cost_cents"]))


def canonicalize(shifts: Sequence[TechShift], instance: Instance) -> Plan:
    """Sort shifts by (region, duration, first site, ...) and renumber technicians."""
    ordered = sorted(shifts, key=TechShift.sort_key)
    out = []
    tech_no: Dict[int, int] = {}
    for sh in ordered:
        t = tech_no.get(sh.region, 0)
        tech_no[sh.region] = t + 1
        out.append(TechShift(sh.region, t, sh.duration, sh.visits))
    return Plan(out, sum(instance.shift_cost(sh.duration) for sh in out))


def build_shift(instance: Instance, region: int, path: Sequence[int],
                side_counts: Dict[int, int]) -> TechShift:
    """Shift visiting ``path`` in order, starting each visit as early as possible.

    ``side_counts`` maps sides to endpoints; every side's site must lie on
    the path. The duration is the shortest one that fits the makespan.
    """
    theta = instance.resources.theta
    at_site: Dict[int, List[Tuple[int, int]]] = {}
    for k, n in side_counts.items():
        if n > 0:
            site, _, p = instance.sides[k]
            at_site.setdefault(site, []).append((p, n))
    visits = []
    t = 0
    prev = None
    for s in path:
        if prev is not None:
            t += instance.T[prev][s]
        counts = tuple(sorted(at_site.get(s, [])))
        end = t + theta * sum(n for _, n in counts)
        visits.append(Visit(s, t, end, counts))
        t = end
        prev = s
    duration = next((d for d in instance.resources.durations if d >= t), None)
    if duration is None:
        raise ValueError(f"shift makespan {t} exceeds every duration")
    return TechShift(region, 0, duration, tuple(visits))


# -- verification ---------------------------------------------------------------


def verify_plan(plan: Plan, instance: Instance, m_bar: Sequence[int]) -> bool:
    """Check every plan rule from raw fields."""
    res = instance.resources
    T = instance.T
    per_side = [0] * len(instance.sides)
    per_region = [0] * instance.num_regions
    cost = 0
    for sh in plan.shifts:
        if not 0 <= sh.region < instance.num_regions or sh.duration not in res.durations:
            return False
        per_region[sh.region] += 1
        cost += instance.shift_cost(sh.duration)
        site_of_pair: Dict[int, int] = {}
        prev: Optional[Visit] = None
        for v in sh.visits:
            if not 0 <= v.site < instance.num_sites or instance.region_of(v.site) != sh.region:
                return False
            if v.start < 0 or v.end > sh.duration:
                return False
            if v.end - v.start != res.theta * sum(n for _, n in v.counts):
                return False
            if prev is not None and v.start < prev.end + T[prev.site][v.site]:
                return False
            for p, n in v.counts:
                if not 0 <= p < len(instance.pairs) or n <= 0 or v.site not in instance.pairs[p]:
                    return False
                if site_of_pair.setdefault(p, v.site) != v.site:
                    return False  # both ends of one circuit pair in a single shift
                per_side[instance.side_of(v.site, _other(instance, p, v.site))] += n
            prev = v
    if cost != plan.cost:
        return False
    if any(c > cap for c, cap in zip(per_region, res.eta_tech)) or len(plan.shifts) > res.max_shifts:
        return False
    return all(per_side[k] == m_bar[p] for k, (_, _, p) in enumerate(instance.sides))


def _other(instance: Instance, p: int, site: int) -> int:
    s, t = instance.pairs[p]
    return t if site == s else s


# -- search ---------------------------------------------------------------------


class PlanStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    TIMED_OUT = "timed_out"


@dataclass
class PlanResult:
    status: PlanStatus
    plan: Optional[Plan] = None
    nodes: int = 0

    @property
    def cost(self) -> Optional[int]:
        return None if self.plan is None else self.plan.cost


class _Timeout(Exception):
    pass


@dataclass(frozen=True)
class _Type:
    mask: int  # local site mask
    duration: int
    cost: int
    cap: int


def best_path(geo: RegionGeometry, mask: int) -> List[int]:
    """Local site order of a shortest open path covering ``mask`` (pass-throughs allowed)."""
    k = len(geo.sites)
    target = geo.eff_general[mask]
    full = 1 << k
    via = next(v for v in range(full) if v & mask == mask and geo.hp[v] == target)
    members = [i for i in range(k) if via >> i & 1]
    # Held-Karp with parents over the chosen superset
    idx = {s: j for j, s in enumerate(members)}
    m = len(members)
    INF = math.inf
    dp = [[INF] * m for _ in range(1 << m)]
    par = [[-1] * m for _ in range(1 << m)]
    for j in range(m):
        dp[1 << j][j] = 0
    T = geo.travel
    for sub in range(1, 1 << m):
        for last in range(m):
            cur = dp[sub][last]
            if cur == INF:
                continue
            for nxt in range(m):
                if sub >> nxt & 1:
                    continue
                c = cur + T[members[last]][members[nxt]]
                if c < dp[sub | 1 << nxt][nxt]:
                    dp[sub | 1 << nxt][nxt] = c
                    par[sub | 1 << nxt][nxt] = last
    all_ = (1 << m) - 1
    last = min(range(m), key=lambda j: (dp[all_][j], j))
    order = []
    sub = all_
    while last != -1:
        order.append(members[last])
        p = par[sub][last]
        sub ^= 1 << last
        last = p
    del idx
    return order[::-1]


class _RegionSearch:
    """Per-region best plans with at most ``k`` shifts, for growing ``k``."""

    def __init__(self, instance: Instance, region: int, demand: Dict[int, int], deadline: Optional[float]):
        self.instance = instance
        self.region = region
        self.deadline = deadline
        self.geo = region_geometry(instance, region)
        self.sides = sorted(k for k, d in demand.items() if d > 0)
        self.demand = [demand[k] for k in self.sides]
        self.total = sum(self.demand)
        self.nodes = 0
        geo = self.geo
        self.side_loc = [geo.local[instance.sides[k][0]] for k in self.sides]
        demand_mask = 0
        site_demand = [0] * len(geo.sites)
        for loc, d in zip(self.side_loc, self.demand):
            demand_mask |= 1 << loc
            site_demand[loc] += d
        self.demand_mask = demand_mask
        # intra pairs with both sides demanded: (pair, side idx a, side idx b)
        by_pair: Dict[int, List[int]] = {}
        for i, k in enumerate(self.sides):
            by_pair.setdefault(instance.sides[k][2], []).append(i)
        self.conflicts = [(p, v[0], v[1]) for p, v in sorted(by_pair.items()) if len(v) == 2]
        self.types = self._types(site_demand)
        # profile[k] = (cost, types, allocation) best with at most k shifts
        self.profile: List[Tuple[float, tuple, Optional[list]]] = [
            (0.0, (), []) if self.total == 0 else (math.inf, (), None)
        ]
        self.done = self.total == 0 or not self.types

    def _types(self, site_demand: List[int]) -> List[_Type]:
        res = self.instance.resources
        geo = self.geo
        cands = []
        sub = self.demand_mask
        while sub:
            dem = sum(site_demand[i] for i in range(len(site_demand)) if sub >> i & 1)
            for d in res.durations:
                cap = min((d - geo.eff_general[sub]) // res.theta, dem)
                if cap >= 1:
                    cands.append(_Type(sub, d, self.instance.shift_cost(d), cap))
            sub = (sub - 1) & self.demand_mask
        def covers(u: _Type, t: _Type) -> bool:
            return (t.mask & u.mask) == t.mask and u.cost <= t.cost and u.cap >= t.cap

        keep = []
        for t in cands:
            # drop t if some other type can do everything t can at no more cost;
            # between mutual covers keep the shorter duration
            if not any(u is not t and covers(u, t) and (not covers(t, u) or u.duration < t.duration)
                       for u in cands):
                keep.append(t)
        keep.sort(key=lambda t: (t.cost, -t.cap, t.mask, t.duration))
        return keep

    def _check_time(self):
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise _Timeout()

    def _feasible(self, chosen: Sequence[_Type]) -> Optional[list]:
        """Allocation matrix (shift x side) or None."""
        caps = [t.cap for t in chosen]
        base = [[bool(t.mask >> loc & 1) for loc in self.side_loc] for t in chosen]
        # orientation choices needed for (shift, pair) with both sides reachable
        branch = [(j, a, b) for j, t in enumerate(chosen) for (_, a, b) in self.conflicts
                  if base[j][a] and base[j][b]]
        for pick in itertools.product((0, 1), repeat=len(branch)):
            allowed = [list(r) for r in base]
            for (j, a, b), c in zip(branch, pick):
                allowed[j][b if c == 0 else a] = False
            flow = kernels.transport_feasible(caps, self.demand, allowed)
            if flow is not None:
                return flow
        return None

    def extend(self) -> None:
        """Compute the best plan with exactly ``len(profile)`` shifts."""
        k = len(self.profile)
        bound = self.profile[-1][0]
        types = self.types
        min_cost = types[0].cost
        max_cap = max(t.cap for t in types)
        best = [bound, None, None]
        chosen: List[_Type] = []

        def dfs(start: int, cost: int, cap: int):
            self.nodes += 1
            if self.nodes % 256 == 0:
                self._check_time()
            left = k - len(chosen)
            if left == 0:
                if cap >= self.total and cost < best[0]:
                    flow = self._feasible(chosen)
                    if flow is not None:
                        best[0], best[1], best[2] = cost, tuple(chosen), flow
                return
            if cost + left * min_cost >= best[0]:
                return
            if cap + left * max_cap < self.total:
                return
            for i in range(start, len(types)):
                t = types[i]
                if cost + t.cost + (left - 1) * min_cost >= best[0]:
                    continue
                chosen.append(t)
                dfs(i, cost + t.cost, cap + t.cap)
                chosen.pop()

        dfs(0, 0, 0)
        if best[1] is not None:
            self.profile.append((best[0], best[1], best[2]))
        else:
            self.profile.append(self.profile[-1])
        if k * min_cost >= self.profile[-1][0]:
            self.done = True

    def cost_at(self, k: int) -> float:
        return self.profile[min(k, len(self.profile) - 1)][0]

    def shifts_at(self, k: int) -> List[TechShift]:
        _, chosen, flow = self.profile[min(k, len(self.profile) - 1)]
        out = []
        for j, t in enumerate(chosen):
            counts = {self.sides[i]: flow[j][i] for i in range(len(self.sides)) if flow[j][i] > 0}
            if not counts:
                continue
            used = 0
            for k_side in counts:
                used |= 1 << self.geo.local[self.instance.sides[k_side][0]]
            path = [self.geo.sites[i] for i in best_path(self.geo, used)]
            out.append(build_shift(self.instance, self.region, path, counts))
        return out


def solve_plan(instance: Instance, m_bar: Sequence[int], time_limit: Optional[float] = None) -> PlanResult:
    """Minimum-cost plan meeting ``m_bar`` (circuits per pair) in one window."""
    res = instance.resources
    if len(m_bar) != len(instance.pairs) or any(v < 0 for v in m_bar):
        raise ValueError("m_bar must give a nonnegative count per pair")
    deadline = None if time_limit is None else time.monotonic() + time_limit
    E = res.max_shifts
    demand: List[Dict[int, int]] = [dict() for _ in range(instance.num_regions)]
    for k, (site, _, p) in enumerate(instance.sides):
        if m_bar[p] > 0:
            if m_bar[p] > instance.phi[p]:
                return PlanResult(PlanStatus.INFEASIBLE)
            demand[instance.region_of(site)][k] = m_bar[p]
    searches = [_RegionSearch(instance, r, demand[r], deadline) for r in range(instance.num_regions)]
    try:
        for r, srch in enumerate(searches):
            limit = min(res.eta_tech[r], E)
            while not srch.done and len(srch.profile) <= limit:
                srch.extend()
    except _Timeout:
        return PlanResult(PlanStatus.TIMED_OUT, None, sum(s.nodes for s in searches))
    nodes = sum(s.nodes for s in searches)
    # knapsack over regions: best[e] = (cost, shift counts) using at most e shifts
    best: List[Tuple[float, Tuple[int, ...]]] = [(0.0, ())] * (E + 1)
    for r, srch in enumerate(searches):
        limit = min(res.eta_tech[r], E)
        nxt: List[Tuple[float, Tuple[int, ...]]] = []
        for e in range(E + 1):
            cand = (math.inf, ())
            for k in range(0, min(limit, e) + 1):
                c = best[e - k][0] + srch.cost_at(k)
                if c < cand[0]:
                    cand = (c, best[e - k][1] + (k,))
            nxt.append(cand)
        best = nxt
    cost, ks = best[E]
    if math.isinf(cost):
        return PlanResult(PlanStatus.INFEASIBLE, None, nodes)
    shifts: List[TechShift] = []
    for srch, k in zip(searches, ks):
        shifts.extend(srch.shifts_at(k))
    plan = canonicalize(shifts, instance)
    return PlanResult(PlanStatus.OPTIMAL, plan, nodes)
