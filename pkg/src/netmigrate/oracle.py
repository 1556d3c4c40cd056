"""Brute-force ground truth for tiny instances.

Nothing here calls the solver's search code: shifts are enumerated from
explicit visit orders over the raw travel matrix, window plans come from a
memoized exact-cover recursion over those shifts, and the migration
schedule is enumerated outright. Only the result types and the plan
checker are shared with the rest of the package.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from .instance import Instance
from .lp import LpModel, solve_lp
from .plan import Plan, TechShift, Visit, canonicalize
from .pricing import Duals, ShiftColumn


class OracleLimitError(ValueError):
    pass


@dataclass(frozen=True)
class OracleLimits:
    max_circuits: int = 6
    max_sites: int = 6
    max_windows: int = 2
    max_tech: int = 2
    max_region_sites: int = 4
    max_capacity: int = 24


@dataclass
class OracleResult:
    feasible: bool
    cost: Optional[int] = None
    m: Optional[List[List[int]]] = None  # per window, per pair
    plans: List[Plan] = field(default_factory=list)
    window_costs: List[int] = field(default_factory=list)
    nodes: int = 0


# -- shifts -------------------------------------------------------------------


def _region_paths(instance: Instance, region: int) -> Dict[frozenset, Tuple[int, Tuple[int, ...]]]:
    """Shortest visit order for every set of sites, over all permutations."""
    sites = instance.region_sites[region]
    T = instance.T
    best: Dict[frozenset, Tuple[int, Tuple[int, ...]]] = {}
    for r in range(1, len(sites) + 1):
        for perm in itertools.permutations(sites, r):
            t = sum(T[a][b] for a, b in zip(perm, perm[1:]))
            key = frozenset(perm)
            if key not in best or (t, perm) < best[key]:
                best[key] = (t, perm)
    return best


def _enumerate_with_paths(instance: Instance, region: int, limits: OracleLimits = OracleLimits()):
    res = instance.resources
    sites = instance.region_sites[region]
    if len(sites) > limits.max_region_sites:
        raise OracleLimitError(f"region {region} has {len(sites)} sites (limit {limits.max_region_sites})")
    if res.durations[-1] // res.theta > limits.max_capacity:
        raise OracleLimitError("shift capacity exceeds the enumeration bound")
    paths = _region_paths(instance, region)
    sides = instance.region_sides[region]
    ranges = []
    for k in sides:
        ranges.append(range(instance.phi[instance.sides[k][2]] + 1))
    out: Dict[ShiftColumn, Tuple[int, ...]] = {}
    for vec in itertools.product(*ranges):
        total = sum(vec)
        if total == 0:
            continue
        counts = tuple((k, n) for k, n in zip(sides, vec) if n > 0)
        pairs_used = [instance.sides[k][2] for k, _ in counts]
        if len(set(pairs_used)) != len(pairs_used):
            continue  # both ends of one circuit pair
        need = frozenset(instance.sides[k][0] for k, _ in counts)
        cands = [(t, perm) for key, (t, perm) in paths.items() if need <= key]
        t, perm = min(cands)
        for d in res.durations:
            if res.theta * total + t <= d:
                out[ShiftColumn(region, d, counts)] = perm
    return out


def enumerate_columns(instance: Instance, region: int, limits: OracleLimits = OracleLimits()) -> List[ShiftColumn]:
    """Every valid shift pattern of ``region``, sorted."""
    return sorted(_enumerate_with_paths(instance, region, limits))


def all_columns(instance: Instance, limits: OracleLimits = OracleLimits()) -> List[ShiftColumn]:
    cols: List[ShiftColumn] = []
    for r in range(instance.num_regions):
        cols.extend(enumerate_columns(instance, r, limits))
    return cols


# -- LP with every column ------------------------------------------------------------


def _rows(instance: Instance, m_bar: Sequence[int], columns: Sequence[ShiftColumn]):
    """(A, senses, b) of the shift-selection LP written out directly."""
    res = instance.resources
    nsides = len(instance.sides)
    A = [[0.0] * len(columns) for _ in range(nsides + instance.num_regions + 1)]
    for j, c in enumerate(columns):
        for k, n in c.counts:
            A[k][j] = float(n)
        A[nsides + c.region][j] = 1.0
        A[-1][j] = 1.0
    b = [float(m_bar[instance.sides[k][2]]) for k in range(nsides)]
    b += [float(e) for e in res.eta_tech] + [float(res.max_shifts)]
    senses = [">="] * nsides + ["<="] * (instance.num_regions + 1)
    return A, senses, b


def full_lp_value(instance: Instance, m_bar: Sequence[int], columns: Sequence[ShiftColumn]) -> Optional[float]:
    """Optimum of the shift-selection LP over ``columns``; ``None`` if infeasible."""
    A, senses, b = _rows(instance, m_bar, columns)
    lp = LpModel()
    for c in columns:
        lp.add_variable(float(instance.shift_cost(c.duration)))
    for row, s, rhs in zip(A, senses, b):
        lp.add_constraint({j: a for j, a in enumerate(row) if a}, s, rhs)
    sol = solve_lp(lp)
    return sol.objective if sol.optimal else None


def fewest_shifts(instance: Instance, m_bar: Sequence[int], columns: Sequence[ShiftColumn],
                  region: Optional[int] = None) -> Optional[float]:
    """LP minimum number of shifts over ``columns``; ``None`` if infeasible.

    With ``region`` only that region's sides, technician cap and columns
    are kept (the engineer cap and other regions are dropped).
    """
    if region is None:
        A, senses, b = _rows(instance, m_bar, columns)
        keep_cols = list(range(len(columns)))
    else:
        keep_cols = [j for j, c in enumerate(columns) if c.region == region]
        sub = [columns[j] for j in keep_cols]
        A_all, senses_all, b_all = _rows(instance, m_bar, sub)
        nsides = len(instance.sides)
        rows = list(instance.region_sides[region]) + [nsides + region]
        A = [A_all[i] for i in rows]
        senses = [senses_all[i] for i in rows]
        b = [b_all[i] for i in rows]
    lp = LpModel()
    for _ in keep_cols:
        lp.add_variable(1.0)
    for row, sense, rhs in zip(A, senses, b):
        lp.add_constraint({j: a for j, a in enumerate(row) if a}, sense, rhs)
    sol = solve_lp(lp)
    return sol.objective if sol.optimal else None


def verify_farkas(duals: Duals, instance: Instance, m_bar: Sequence[int], columns: Sequence[ShiftColumn],
                  tol: float = 1e-7) -> bool:
    """Check the infeasibility certificate ``y >= 0, y^T A <= 0, y^T b > 0``.

    Rows are taken in ``>=`` form, so the certificate is
    ``y = (cover, -tech, -eng)``.
    """
    A, senses, b = _rows(instance, m_bar, columns)
    y = list(duals.cover) + [-t for t in duals.tech] + [-duals.eng]
    sign = [1.0 if s == ">=" else -1.0 for s in senses]
    if any(v < -tol for v in y):
        return False
    for j in range(len(columns)):
        if sum(y[i] * sign[i] * A[i][j] for i in range(len(y))) > tol:
            return False
    return sum(y[i] * sign[i] * b[i] for i in range(len(y))) > tol


# -- exact solve ------------------------------------------------------------------


def check_limits(instance: Instance, limits: OracleLimits) -> None:
    res = instance.resources
    if sum(instance.phi) > limits.max_circuits:
        raise OracleLimitError(f"{sum(instance.phi)} circuits (limit {limits.max_circuits})")
    if instance.num_sites > limits.max_sites:
        raise OracleLimitError(f"{instance.num_sites} sites (limit {limits.max_sites})")
    if res.num_windows > limits.max_windows:
        raise OracleLimitError(f"{res.num_windows} windows (limit {limits.max_windows})")
    if any(e > limits.max_tech for e in res.eta_tech):
        raise OracleLimitError(f"technicians per region above {limits.max_tech}")


class WindowOracle:
    """Exact cheapest window plan by recursion over remaining side demand."""

    def __init__(self, instance: Instance, limits: OracleLimits = OracleLimits()):
        self.instance = instance
        self.paths: Dict[ShiftColumn, Tuple[int, ...]] = {}
        for r in range(instance.num_regions):
            self.paths.update(_enumerate_with_paths(instance, r, limits))
        self.by_side: Dict[int, List[ShiftColumn]] = {}
        for c in sorted(self.paths):
            for k, _ in c.counts:
                self.by_side.setdefault(k, []).append(c)
        self.nodes = 0
        self._solve = lru_cache(maxsize=None)(self._solve_uncached)

    def _solve_uncached(self, need: Tuple[int, ...], used: Tuple[int, ...]):
        self.nodes += 1
        inst = self.instance
        res = inst.resources
        first = next((k for k, v in enumerate(need) if v > 0), None)
        if first is None:
            return 0, ()
        if sum(used) >= res.max_shifts:
            return math.inf, ()
        best = (math.inf, ())
        for c in self.by_side.get(first, []):
            if used[c.region] >= res.eta_tech[c.region]:
                continue
            if any(n > need[k] for k, n in c.counts):
                continue
            rest = list(need)
            for k, n in c.counts:
                rest[k] -= n
            u = list(used)
            u[c.region] += 1
            sub, cols = self._solve(tuple(rest), tuple(u))
            total = sub + inst.shift_cost(c.duration)
            if total < best[0]:
                best = (total, (c,) + cols)
        return best

    def cost(self, m_bar: Sequence[int]) -> Tuple[float, Tuple[ShiftColumn, ...]]:
        need = tuple(m_bar[p] for _, _, p in self.instance.sides)
        return self._solve(need, (0,) * self.instance.num_regions)

    def plan(self, m_bar: Sequence[int]) -> Optional[Plan]:
        cost, cols = self.cost(m_bar)
        if math.isinf(cost):
            return None
        inst = self.instance
        theta = inst.resources.theta
        shifts = []
        for c in cols:
            per_site: Dict[int, List[Tuple[int, int]]] = {}
            for k, n in c.counts:
                site, _, p = inst.sides[k]
                per_site.setdefault(site, []).append((p, n))
            visits, t, prev = [], 0, None
            for s in self.paths[c]:
                if prev is not None:
                    t += inst.T[prev][s]
                counts = tuple(sorted(per_site.get(s, [])))
                end = t + theta * sum(n for _, n in counts)
                visits.append(Visit(s, t, end, counts))
                t, prev = end, s
            shifts.append(TechShift(c.region, 0, c.duration, tuple(visits)))
        return canonicalize(shifts, inst)


def solve_exact(instance: Instance, limits: OracleLimits = OracleLimits()) -> OracleResult:
    """Cheapest migration schedule over all windows, by full enumeration."""
    check_limits(instance, limits)
    res = instance.resources
    W = res.num_windows
    P = len(instance.pairs)
    if P == 0:
        return OracleResult(True, 0, [[] for _ in range(W)], [Plan() for _ in range(W)], [0] * W)
    if W == 0:
        return OracleResult(False)
    win = WindowOracle(instance, limits)
    # every split of each pair's circuits over the windows (each m in [0, phi])
    per_pair = []
    for phi in instance.phi:
        per_pair.append([split for split in itertools.product(range(phi + 1), repeat=W) if sum(split) >= phi])
    best: Optional[Tuple[int, tuple]] = None
    for choice in itertools.product(*per_pair):
        m = [[choice[p][w] for p in range(P)] for w in range(W)]
        if any(sum(row) > res.eta_cir for row in m):
            continue
        total = 0
        for row in m:
            c, _ = win.cost(row)
            total += c
            if best is not None and total >= best[0]:
                break
        if math.isinf(total):
            continue
        if best is None or total < best[0]:
            best = (int(total), tuple(tuple(r) for r in m))
    if best is None:
        return OracleResult(False, nodes=win.nodes)
    m = [list(r) for r in best[1]]
    plans = [win.plan(r) for r in m]
    return OracleResult(True, best[0], m, plans, [pl.cost for pl in plans], win.nodes)


def window_cost(instance: Instance, m_bar: Sequence[int], limits: OracleLimits = OracleLimits()) -> Optional[int]:
    """Exact plan cost of one window (``None`` if no plan exists)."""
    c, _ = WindowOracle(instance, limits).cost(m_bar)
    return None if math.isinf(c) else int(c)
