"""Column generation for the per-window shift-selection LP.

Rows of the restricted master, in order:

* one ``>=`` coverage row per side (rhs = the pair's migration count),
* one ``<=`` technician row per region,
* one ``<=`` engineer row.

Columns are shift patterns (:class:`ShiftColumn`); their cost is the shift
cost of their duration. Windows are interchangeable, so the pool and the
result cache are shared by all windows.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .instance import Instance
from .lp import LpModel, LpSession
from .pricing import Duals, PricingInput, ShiftColumn, column_cost, price_general, price_ordered

log = logging.getLogger(__name__)

PHASE_ONE_TOL = 1e-9  # pricing tolerance while hunting for a certificate
PHASE_ONE_FEAS = 1e-6  # phase-one optimum (per migrated circuit) treated as zero
MAX_ROUNDS = 100_000


class PricingMode(str, enum.Enum):
    ORDERED = "ordered"
    HYBRID = "hybrid"
    GENERAL = "general"


class ColumnPool:
    """Deduplicated, insertion-ordered set of columns shared by all windows."""

    def __init__(self, instance: Instance):
        self.instance = instance
        self.columns: List[ShiftColumn] = []
        self._index: Dict[ShiftColumn, int] = {}

    def __len__(self) -> int:
        return len(self.columns)

    def __contains__(self, col: ShiftColumn) -> bool:
        return col in self._index

    def add(self, cols: Sequence[ShiftColumn]) -> int:
        added = 0
        for c in cols:
            if c not in self._index:
                self._index[c] = len(self.columns)
                self.columns.append(c)
                added += 1
        return added

    def clear(self) -> None:
        self.columns.clear()
        self._index.clear()


def column_coefficients(col: ShiftColumn, instance: Instance) -> List[float]:
    nsides = len(instance.sides)
    coeffs = [0.0] * (nsides + instance.num_regions + 1)
    for k, n in col.counts:
        coeffs[k] = float(n)
    coeffs[nsides + col.region] = 1.0
    coeffs[-1] = 1.0
    return coeffs


def side_rhs(instance: Instance, m_bar: Sequence[int]) -> List[int]:
    return [m_bar[p] for _, _, p in instance.sides]


def build_rmp(instance: Instance, m_bar: Sequence[int], columns: Sequence[ShiftColumn],
              phase_one: bool = False, unit_cost: bool = False) -> Tuple[LpModel, List[int]]:
    """Restricted master over ``columns``.

    With ``phase_one`` every column costs 0 and an artificial variable of
    cost 1 is added to each coverage row with positive rhs. Returns the
    model and the indices of the artificial variables. With ``unit_cost``
    every column costs 1, so the optimum is the fewest shifts (fractionally).
    """
    res = instance.resources
    lp = LpModel()
    rows: List[Dict[int, float]] = [dict() for _ in range(len(instance.sides) + instance.num_regions + 1)]
    for col in columns:
        j = lp.add_variable(column_cost(instance, col.duration, phase_one, unit_cost))
        for i, a in enumerate(column_coefficients(col, instance)):
            if a:
                rows[i][j] = a
    arts = []
    rhs = side_rhs(instance, m_bar)
    if phase_one:
        for k, b in enumerate(rhs):
            if b > 0:
                j = lp.add_variable(1.0)
                rows[k][j] = 1.0
                arts.append(j)
    nsides = len(instance.sides)
    for k in range(nsides):
        lp.add_constraint(rows[k], ">=", rhs[k])
    for r in range(instance.num_regions):
        lp.add_constraint(rows[nsides + r], "<=", res.eta_tech[r])
    lp.add_constraint(rows[-1], "<=", res.max_shifts)
    return lp, arts


def _split_duals(instance: Instance, y: Sequence[float]) -> Duals:
    nsides = len(instance.sides)
    return Duals(list(y[:nsides]), list(y[nsides:nsides + instance.num_regions]), float(y[-1]))


@dataclass
class CgResult:
    feasible: bool
    value: float
    duals: Duals
    columns_generated: int = 0
    rounds: int = 0
    z: Dict[ShiftColumn, float] = field(default_factory=dict)


def _pricers(mode: PricingMode):
    if mode is PricingMode.ORDERED:
        return [price_ordered]
    if mode is PricingMode.GENERAL:
        return [price_general]
    return [price_ordered, price_general]


def _run(instance: Instance, m_bar: Sequence[int], pool: ColumnPool, mode: PricingMode,
         phase_one: bool, tol: float, unit_cost: bool = False):
    """CG loop; returns (lp solution, columns in the final RMP, duals, #generated, rounds)."""
    pricers = _pricers(mode)
    generated = 0
    rounds = 0
    cols = list(pool.columns)
    in_rmp = set(cols)
    lp, _ = build_rmp(instance, m_bar, cols, phase_one, unit_cost)
    session = LpSession(lp)
    while True:
        rounds += 1
        if rounds > MAX_ROUNDS:
            raise RuntimeError("column generation did not converge")
        sol = session.solve()
        if not sol.optimal:
            # only reachable in phase two if the pool lost the phase-one basis
            raise RuntimeError(f"restricted master is {sol.status.value}")
        duals = _split_duals(instance, sol.duals)
        # price with the cheapest pricer first; fall through to the next
        # only when every region is exhausted under the current one
        new: List[ShiftColumn] = []
        for pricer in pricers:
            for r in range(instance.num_regions):
                if instance.resources.eta_tech[r] == 0 and not phase_one:
                    # columns of a region without technicians can never be used
                    continue
                new.extend(pricer(PricingInput(instance, r, duals, phase_one=phase_one, tol=tol,
                                                unit_cost=unit_cost)))
            if new:
                break
        generated += pool.add(new)
        added = 0
        for c in new:
            if c in in_rmp:
                continue
            in_rmp.add(c)
            cols.append(c)
            obj = column_cost(instance, c.duration, phase_one, unit_cost)
            session.add_column(obj, {i: a for i, a in enumerate(column_coefficients(c, instance)) if a})
            added += 1
        if not added:
            x = sol.x[:len(cols)]
            return sol, cols, x, duals, generated, rounds


def init_phase(instance: Instance, m_bar: Sequence[int], pool: ColumnPool,
               mode: PricingMode = PricingMode.HYBRID) -> CgResult:
    """Phase one: ``feasible`` with value 0, or a Farkas certificate in ``duals``.

    The certificate is always finished with the exact pricer, whatever the
    mode, so an infeasibility verdict never depends on the pricing shortcut.
    """
    if not any(m_bar):
        return CgResult(True, 0.0, Duals.zeros(instance))
    if mode is PricingMode.ORDERED:
        mode = PricingMode.HYBRID
    sol, _, _, duals, gen, rounds = _run(instance, m_bar, pool, mode, True, PHASE_ONE_TOL)
    scale = max(1.0, sum(m_bar))
    if sol.objective <= PHASE_ONE_FEAS * scale:
        return CgResult(True, 0.0, duals, gen, rounds)
    return CgResult(False, sol.objective, duals, gen, rounds)


def solve_cg(instance: Instance, m_bar: Sequence[int], pool: ColumnPool,
             mode: PricingMode = PricingMode.HYBRID, tol: float = 1e-6, unit_cost: bool = False) -> CgResult:
    """Phase two, assuming :func:`init_phase` succeeded for ``m_bar``.

    ``unit_cost`` minimises the number of shifts instead of their cost.
    """
    sol, cols, x, duals, gen, rounds = _run(instance, m_bar, pool, mode, False, tol, unit_cost)
    z = {c: v for c, v in zip(cols, x) if v > 1e-9}
    return CgResult(True, sol.objective, duals, gen, rounds, z)


def region_count_lp(instance: Instance, region: int, m_bar: Sequence[int], pool: ColumnPool,
                    mode: PricingMode = PricingMode.HYBRID, tol: float = 1e-6) -> CgResult:
    """Fewest shifts of one region (LP relaxation), ignoring all other regions.

    Rows: coverage of the region's sides and its technician cap. Each
    coverage row gets an artificial priced at ``eta_tech + 1``, so the RMP is
    always feasible; the returned duals stay feasible for the dual of the
    region LP whatever the artificials do, so cuts built from them are valid.
    Duals of rows outside the region are zero.
    """
    inst = instance
    sides = list(inst.region_sides[region])
    row_of = {k: i for i, k in enumerate(sides)}
    cap = inst.resources.eta_tech[region]
    lp = LpModel()
    rows: List[Dict[int, float]] = [dict() for _ in range(len(sides) + 1)]
    cols = [c for c in pool.columns if c.region == region]
    in_rmp = set(cols)

    def coeffs(c: ShiftColumn) -> Dict[int, float]:
        out = {row_of[k]: float(n) for k, n in c.counts}
        out[len(sides)] = 1.0
        return out

    for c in cols:
        j = lp.add_variable(1.0)
        for i, a in coeffs(c).items():
            rows[i][j] = a
    for i in range(len(sides)):
        rows[i][lp.add_variable(cap + 1.0)] = 1.0
    for i, k in enumerate(sides):
        lp.add_constraint(rows[i], ">=", m_bar[inst.sides[k][2]])
    lp.add_constraint(rows[-1], "<=", cap)
    session = LpSession(lp)
    pricers = _pricers(mode)
    generated = rounds = 0
    while True:
        rounds += 1
        if rounds > MAX_ROUNDS:
            raise RuntimeError("column generation did not converge")
        sol = session.solve()
        if not sol.optimal:
            raise RuntimeError(f"region count LP is {sol.status.value}")
        cover = [0.0] * len(inst.sides)
        for i, k in enumerate(sides):
            cover[k] = sol.duals[i]
        tech = [0.0] * inst.num_regions
        tech[region] = sol.duals[len(sides)]
        duals = Duals(cover, tech, 0.0)
        new: List[ShiftColumn] = []
        for pricer in pricers:
            new = [c for c in pricer(PricingInput(inst, region, duals, tol=tol, unit_cost=True)) if c not in in_rmp]
            if new:
                break
        if not new:
            return CgResult(True, sol.objective, duals, generated, rounds)
        generated += pool.add(new)
        for c in new:
            in_rmp.add(c)
            session.add_column(1.0, coeffs(c))


class CgSolver:
    """Window subproblem evaluator with a shared pool and a result cache."""

    def __init__(self, instance: Instance, mode: PricingMode = PricingMode.HYBRID, keep_columns: bool = True):
        self.instance = instance
        self.mode = PricingMode(mode)
        self.keep_columns = keep_columns
        self.pool = ColumnPool(instance)
        self.cache: Dict[Tuple[int, ...], CgResult] = {}
        self.count_cache: Dict[Tuple[int, ...], CgResult] = {}
        self.region_cache: Dict[Tuple[int, Tuple[int, ...]], CgResult] = {}
        self.columns_generated = 0
        self.probes: List[Tuple[Tuple[int, ...], CgResult]] = []

    def evaluate(self, m_bar: Sequence[int]) -> CgResult:
        key = tuple(int(v) for v in m_bar)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        if not self.keep_columns:
            self.pool.clear()
        res = init_phase(self.instance, key, self.pool, self.mode)
        gen = res.columns_generated
        if res.feasible:
            res = solve_cg(self.instance, key, self.pool, self.mode)
            res.columns_generated += gen
        self.columns_generated += res.columns_generated
        self.cache[key] = res
        self.probes.append((key, res))
        return res

    def shift_count(self, m_bar: Sequence[int]) -> CgResult:
        """Fewest shifts (LP relaxation) covering ``m_bar``; ``m_bar`` must be feasible."""
        key = tuple(int(v) for v in m_bar)
        hit = self.count_cache.get(key)
        if hit is not None:
            return hit
        if not self.evaluate(key).feasible:
            raise ValueError("shift count requested for an infeasible window")
        res = solve_cg(self.instance, key, self.pool, self.mode, unit_cost=True)
        self.columns_generated += res.columns_generated
        self.count_cache[key] = res
        return res

    def region_count(self, region: int, m_bar: Sequence[int]) -> CgResult:
        """:func:`region_count_lp`, cached on the demand of the region's pairs."""
        inst = self.instance
        pairs = {inst.sides[k][2] for k in inst.region_sides[region]}
        key = (region, tuple(int(m_bar[p]) if p in pairs else 0 for p in range(len(inst.pairs))))
        hit = self.region_cache.get(key)
        if hit is not None:
            return hit
        res = region_count_lp(inst, region, key[1], self.pool, self.mode)
        self.columns_generated += res.columns_generated
        self.region_cache[key] = res
        return res
