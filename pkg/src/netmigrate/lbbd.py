"""Logic-based Benders loop.

The master chooses, per window, how many circuits of each pair to migrate
(``m``) and a cost estimate per window (``eta``). It is solved by
branch-and-bound; at every integral node the window LPs are evaluated by
column generation and Benders feasibility/optimality cuts are added
lazily. After each master solve every window is planned exactly, and
infeasible or under-estimated windows get combinatorial cuts with fresh
binaries, after which the master is rebuilt and re-solved.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .colgen import CgResult, CgSolver, PricingMode
from .instance import Instance
from .lp import LpModel, Row
from .mip import MipModel, MipStatus, solve_mip
from .plan import Plan, PlanStatus, solve_plan

log = logging.getLogger(__name__)

BD_FEAS = "bd_feas"
BD_OPT = "bd_opt"
LBBD_FEAS = "lbbd_feas"
LBBD_OPT = "lbbd_opt"
BD_COUNT = "bd_count"
BD_REGION_COUNT = "bd_region_count"
CUT_KINDS = (BD_FEAS, BD_OPT, LBBD_FEAS, LBBD_OPT, BD_COUNT, BD_REGION_COUNT)
SHIFT_KINDS = (BD_COUNT, BD_REGION_COUNT)

VIOL_TOL = 1e-6


@dataclass
class Config:
    target_gap: float = 0.10
    time_limit_s: float = 10800.0
    propagate: bool = True
    pricing_mode: str = "hybrid"
    keep_columns: bool = True
    seed: int = 0
    gap_schedule: Tuple[float, ...] = (0.10, 0.05, 0.0)
    # "positive": at most (#pairs with m>0) - 1 of the kappas may be 1;
    # "all_pairs": the looser bound (#pairs) - 1
    feas_cut_rhs: str = "positive"
    max_iterations: int = 10_000
    # integer shift counts per window and region, bounded below by cuts from
    # fewest-shifts LPs and linked by eta >= (cheapest shift) * count
    shift_count_cuts: bool = True

    def __post_init__(self):
        if not 0 <= self.target_gap < 1:
            raise ValueError("target_gap must lie in [0, 1)")
        PricingMode(self.pricing_mode)
        if self.feas_cut_rhs not in ("positive", "all_pairs"):
            raise ValueError("feas_cut_rhs must be 'positive' or 'all_pairs'")

    def to_dict(self) -> dict:
        return {
            "target_gap": self.target_gap,
            "time_limit_s": self.time_limit_s,
            "propagate": self.propagate,
            "pricing_mode": self.pricing_mode,
            "keep_columns": self.keep_columns,
            "seed": self.seed,
            "gap_schedule": list(self.gap_schedule),
            "feas_cut_rhs": self.feas_cut_rhs,
            "shift_count_cuts": self.shift_count_cuts,
        }


@dataclass(frozen=True)
class Cut:
    """One cut on window ``window``.

    Benders kinds: ``sum coeffs[p] * m[p] + eta_coeff * eta >= rhs``; the
    shift-count kinds have the same form with the window's shift count
    (or, with ``region`` set, the region's shift count) in place of ``eta``.
    LBBD kinds: ``m_bar`` snapshot plus ``value`` (plan cost for the
    optimality kind) and ``kappa_rhs`` (bound on the kappa sum, feasibility
    kind only).
    """

    kind: str
    window: int
    coeffs: Tuple[float, ...] = ()
    eta_coeff: float = 0.0
    rhs: float = 0.0
    m_bar: Tuple[int, ...] = ()
    value: int = 0
    kappa_rhs: int = 0
    region: int = -1

    def key(self) -> str:
        payload = (self.kind, self.window, tuple(round(c, 9) for c in self.coeffs), round(self.eta_coeff, 9),
                   round(self.rhs, 6), self.m_bar, self.value, self.kappa_rhs, self.region)
        return hashlib.sha1(repr(payload).encode()).hexdigest()

    def for_window(self, w: int) -> "Cut":
        return dataclasses.replace(self, window=w)

    def satisfied_by(self, m_w: Sequence[int], eta_w: float, tol: float = 1e-6,
                     shifts: Optional[Sequence[int]] = None) -> bool:
        """Is there a completion (kappa) of this cut at the window point ``(m_w, eta_w)``?

        Shift-count cuts read ``shifts``, the window's shift count per region.
        """
        if self.kind in (BD_FEAS, BD_OPT) + SHIFT_KINDS:
            y = eta_w
            if self.kind in SHIFT_KINDS:
                if shifts is None:
                    raise ValueError("shift-count cut needs per-region shift counts")
                y = sum(shifts) if self.kind == BD_COUNT else shifts[self.region]
            act = sum(c * v for c, v in zip(self.coeffs, m_w)) + self.eta_coeff * y
            return act >= self.rhs - tol * max(1.0, abs(self.rhs))
        pos = [p for p, v in enumerate(self.m_bar) if v > 0]
        # kappa must be 1 where m >= m_bar; setting it to 0 elsewhere is always best
        forced = sum(1 for p in pos if m_w[p] >= self.m_bar[p])
        if self.kind == LBBD_FEAS:
            return forced <= self.kappa_rhs
        bound = self.value * (1 - (len(pos) - forced))
        return eta_w >= bound - tol * max(1.0, abs(self.value))


@dataclass
class SolveReport:
    status: str
    cost: Optional[int]
    lb: float
    gap: float
    iterations: int
    cuts: Dict[str, int]
    columns: int
    m: List[List[int]] = field(default_factory=list)
    plans: List[Plan] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=dict)
    cut_log: List[Cut] = field(default_factory=list)
    history: List[Tuple[float, float]] = field(default_factory=list)  # (LB, UB) per iteration
    probes: List[Tuple[Tuple[int, ...], CgResult]] = field(default_factory=list)  # window LP evaluations

    def to_dict(self, instance: Instance, config: Optional[Config] = None) -> dict:
        """JSON document; timings are left out so reruns are byte-identical."""
        doc = {
            "instance": instance.name,
            "status": self.status,
            "cost_cents": self.cost,
            "lb_cents": _num(self.lb),
            "gap": _num(self.gap),
            "iterations": self.iterations,
            "cuts": dict(self.cuts),
            "columns": self.columns,
            "m": self.m,
            "windows": [p.to_dict(instance) for p in self.plans],
        }
        if config is not None:
            doc["config"] = config.to_dict()
        return doc

    def dumps(self, instance: Instance, config: Optional[Config] = None) -> str:
        return json.dumps(self.to_dict(instance, config), indent=1, sort_keys=True) + "\n"


def _num(v: float):
    if v is None or math.isinf(v) or math.isnan(v):
        return None
    return round(v, 6)


# -- cut construction --------------------------------------------------------------


def benders_cuts(instance: Instance, cg: CgSolver, w: int, m_bar: Sequence[int], eta_bar: float,
                 shifts_bar: Optional[Sequence[float]] = None) -> List[Cut]:
    """Violated Benders cuts for window ``w`` at the integer point (possibly none).

    With ``shifts_bar`` (the master's shift count per region) shift-count
    cuts are also returned where a fewest-shifts LP exceeds it.
    """
    res = cg.evaluate(m_bar)
    d = res.duals
    coeffs = tuple(d.pair_coefficients())
    if not res.feasible:
        const = sum(t * e for t, e in zip(d.tech, instance.resources.eta_tech)) + d.eng * instance.resources.max_shifts
        # 0 >= coeffs.m + const  <=>  -coeffs.m >= const
        return [Cut(BD_FEAS, w, tuple(-c for c in coeffs), 0.0, const)]
    out: List[Cut] = []
    v = res.value
    if v > eta_bar + VIOL_TOL * max(1.0, abs(v)):
        # eta >= v - sum c (m_bar - m)  <=>  eta - c.m >= v - c.m_bar
        rhs = v - sum(c * mb for c, mb in zip(coeffs, m_bar))
        out.append(Cut(BD_OPT, w, tuple(-c for c in coeffs), 1.0, rhs))
    if shifts_bar is not None:
        cnt = cg.shift_count(m_bar)
        if cnt.value > sum(shifts_bar) + VIOL_TOL:
            cc = cnt.duals.pair_coefficients()
            rhs = cnt.value - sum(c * mb for c, mb in zip(cc, m_bar))
            out.append(Cut(BD_COUNT, w, tuple(-c for c in cc), 1.0, rhs))
        for r in range(instance.num_regions):
            if not any(m_bar[instance.sides[k][2]] for k in instance.region_sides[r]):
                continue
            rc = cg.region_count(r, m_bar)
            if rc.value > shifts_bar[r] + VIOL_TOL:
                cc = rc.duals.pair_coefficients()
                rhs = rc.value - sum(c * mb for c, mb in zip(cc, m_bar))
                out.append(Cut(BD_REGION_COUNT, w, tuple(-c for c in cc), 1.0, rhs, region=r))
    return out


def make_lbbd_feas_cut(instance: Instance, w: int, m_bar: Sequence[int], rhs_mode: str = "positive") -> Cut:
    pos = sum(1 for v in m_bar if v > 0)
    kappa_rhs = pos - 1 if rhs_mode == "positive" else len(instance.pairs) - 1
    return Cut(LBBD_FEAS, w, m_bar=tuple(m_bar), kappa_rhs=kappa_rhs)


def make_lbbd_opt_cut(instance: Instance, w: int, m_bar: Sequence[int], cp_value: int) -> Cut:
    return Cut(LBBD_OPT, w, m_bar=tuple(m_bar), value=int(cp_value))


def lbbd_block(instance: Instance, cut: Cut, m_var, eta_var, new_binary) -> List[Row]:
    """Rows realising an LBBD cut; ``new_binary()`` allocates a kappa."""
    rows: List[Row] = []
    kappas = []
    for p, v in enumerate(cut.m_bar):
        if v <= 0:
            continue
        k = new_binary()
        kappas.append(k)
        rows.append(({m_var(cut.window, p): 1.0, k: -(instance.phi[p] + 1.0)}, "<=", v - 1.0))
    if cut.kind == LBBD_FEAS:
        rows.append(({k: 1.0 for k in kappas}, "<=", float(cut.kappa_rhs)))
    else:
        n = len(kappas)
        row = {eta_var(cut.window): 1.0}
        for k in kappas:
            row[k] = -float(cut.value)
        rows.append((row, ">=", float(cut.value) * (1 - n)))
    return rows


def check_opt_cut_tight(instance: Instance, m_hat: Sequence[int], m_bar: Sequence[int], plan: Plan) -> bool:
    """Sufficient test that the plan for ``m_bar`` extends to ``m_hat`` at equal cost.

    Each side with extra endpoints needs its own technician who already
    works at that site, does not handle the other end of the same pair,
    and has room for the extra migration time at the end of the shift.
    """
    theta = instance.resources.theta
    extra = []
    for k, (site, other, p) in enumerate(instance.sides):
        diff = m_hat[p] - m_bar[p]
        if diff < 0:
            return False
        if diff > 0:
            extra.append((k, site, other, p, diff))
    if not extra:
        return True
    adj: List[List[int]] = []
    for k, site, other, p, diff in extra:
        nbrs = []
        for j, sh in enumerate(plan.shifts):
            if not sh.visits or not any(v.site == site for v in sh.visits):
                continue
            if instance.is_intra(p) and any(v.site == other and any(q == p for q, _ in v.counts) for v in sh.visits):
                continue
            if sh.visits[-1].end + theta * diff <= sh.duration:
                nbrs.append(j)
        adj.append(nbrs)
    # augmenting-path bipartite matching, sides -> shifts
    match: Dict[int, int] = {}

    def augment(i: int, seen: set) -> bool:
        for j in adj[i]:
            if j in seen:
                continue
            seen.add(j)
            if j not in match or augment(match[j], seen):
                match[j] = i
                return True
        return False

    return all(augment(i, set()) for i in range(len(extra)))


# -- main loop ---------------------------------------------------------------------


class _Master:
    def __init__(self, instance: Instance, shift_counts: bool = False):
        self.instance = instance
        self.W = instance.num_windows
        self.P = len(instance.pairs)
        self.shift_counts = shift_counts

    def m_var(self, w: int, p: int) -> int:
        return w * self.P + p

    def eta_var(self, w: int) -> int:
        return self.W * self.P + w

    def shift_var(self, w: int, r: int) -> int:
        return self.W * self.P + self.W + w * self.instance.num_regions + r

    def benders_row(self, cut: Cut) -> Row:
        row = {self.m_var(cut.window, p): c for p, c in enumerate(cut.coeffs) if c}
        if cut.eta_coeff:
            if cut.kind == BD_COUNT:
                for r in range(self.instance.num_regions):
                    row[self.shift_var(cut.window, r)] = cut.eta_coeff
            elif cut.kind == BD_REGION_COUNT:
                row[self.shift_var(cut.window, cut.region)] = cut.eta_coeff
            else:
                row[self.eta_var(cut.window)] = cut.eta_coeff
        return row, ">=", cut.rhs

    def build(self, cuts: Sequence[Cut]) -> MipModel:
        inst = self.instance
        res = inst.resources
        lp = LpModel()
        model = MipModel(lp)
        for w in range(self.W):
            for p in range(self.P):
                model.add_integer_variable(0.0, 0.0, float(inst.phi[p]))
        cap = float(inst.window_cost_cap())
        for w in range(self.W):
            lp.add_variable(1.0, 0.0, cap)
        if self.shift_counts:
            self._shift_rows(model)
        for p in range(self.P):
            lp.add_constraint({self.m_var(w, p): 1.0 for w in range(self.W)}, ">=", inst.phi[p])
        for w in range(self.W):
            if self.P:
                lp.add_constraint({self.m_var(w, p): 1.0 for p in range(self.P)}, "<=", res.eta_cir)
        for cut in cuts:
            if cut.kind in (BD_FEAS, BD_OPT) + SHIFT_KINDS:
                lp.add_constraint(*self.benders_row(cut))
            else:
                for row in lbbd_block(inst, cut, self.m_var, self.eta_var,
                                      lambda: model.add_integer_variable(0.0, 0.0, 1.0)):
                    lp.add_constraint(*row)
        return model

    def _shift_rows(self, model: MipModel) -> None:
        """Shift counts per window and region, and the rows tying them to the rest.

        Every shift costs at least the cheapest duration, a region never has
        more shifts than technicians, and a window no more than the
        engineers allow. Both ends of an intra-region pair need different
        technicians, so a window migrating any of its circuits has at least
        two shifts in that region.
        """
        inst = self.instance
        res = inst.resources
        lp = model.lp
        R = inst.num_regions
        cheapest = float(min(inst.shift_cost(d) for d in res.durations))
        for w in range(self.W):
            for r in range(R):
                model.add_integer_variable(0.0, 0.0, float(res.eta_tech[r]))  # shift_var(w, r)
        intra = [p for p in range(self.P) if inst.is_intra(p)]
        for w in range(self.W):
            lp.add_constraint({self.eta_var(w): 1.0, **{self.shift_var(w, r): -cheapest for r in range(R)}},
                              ">=", 0.0)
            lp.add_constraint({self.shift_var(w, r): 1.0 for r in range(R)}, "<=", float(res.max_shifts))
            for p in intra:
                used = model.add_integer_variable(0.0, 0.0, 1.0)
                r = inst.region_of(inst.pairs[p][0])
                lp.add_constraint({self.m_var(w, p): 1.0, used: -float(inst.phi[p])}, "<=", 0.0)
                lp.add_constraint({self.shift_var(w, r): 1.0, used: -2.0}, ">=", 0.0)


def run(instance: Instance, config: Optional[Config] = None) -> SolveReport:
    config = config or Config()
    t_start = time.monotonic()
    deadline = t_start + config.time_limit_s
    mode = PricingMode(config.pricing_mode)
    if mode is PricingMode.ORDERED and any(len(s) > 2 for s in instance.region_sites):
        log.warning("ordered-only pricing is not exact for regions with more than two sites; "
                    "bounds may be overstated")
    cg = CgSolver(instance, mode, config.keep_columns)
    master = _Master(instance, config.shift_count_cuts)
    W, P = master.W, master.P
    cuts: List[Cut] = []
    cut_keys = set()
    counts = {k: 0 for k in CUT_KINDS}
    timings = {"master": 0.0, "plan": 0.0}
    plan_cache: Dict[Tuple[int, ...], Tuple[PlanStatus, Optional[Plan]]] = {}
    history: List[Tuple[float, float]] = []

    def add_cut(cut: Cut) -> bool:
        k = cut.key()
        if k in cut_keys:
            return False
        cut_keys.add(k)
        cuts.append(cut)
        counts[cut.kind] += 1
        return True

    def with_copies(cut: Cut) -> List[Cut]:
        if not config.propagate:
            return [cut]
        return [cut] + [cut.for_window(v) for v in range(W) if v != cut.window]

    def separator(x: List[float]) -> List[Row]:
        rows: List[Row] = []
        for w in range(W):
            m_bar = [int(round(x[master.m_var(w, p)])) for p in range(P)]
            eta_bar = x[master.eta_var(w)]
            s_bar = ([x[master.shift_var(w, r)] for r in range(instance.num_regions)]
                     if master.shift_counts else None)
            for cut in benders_cuts(instance, cg, w, m_bar, eta_bar, s_bar):
                for c in with_copies(cut):
                    if add_cut(c):
                        rows.append(master.benders_row(c))
        return rows

    def plan_window(m_bar: Tuple[int, ...]) -> Optional[Tuple[PlanStatus, Optional[Plan]]]:
        """Cached exact plan of one window; ``None`` when the deadline passes."""
        if m_bar not in plan_cache:
            left = deadline - time.monotonic()
            pres = solve_plan(instance, m_bar, time_limit=max(left, 0.0))
            if pres.status is PlanStatus.TIMED_OUT:
                return None
            plan_cache[m_bar] = (pres.status, pres.plan)
        return plan_cache[m_bar]

    def window_points(x: List[float]) -> List[Tuple[int, ...]]:
        return [tuple(int(round(x[master.m_var(w, p)])) for p in range(P)) for w in range(W)]

    ub = math.inf
    lb = 0.0 if P == 0 else -math.inf
    best_m: List[List[int]] = []
    best_plans: List[Plan] = []
    status = None
    it = 0
    while True:
        it += 1
        gap_now = config.gap_schedule[min(it - 1, len(config.gap_schedule) - 1)]
        remaining = deadline - time.monotonic()
        if remaining <= 0:
            status = "timed_out"
            break
        t0 = time.monotonic()
        msol = solve_mip(master.build(cuts), gap_now, separator, time_limit=remaining)
        timings["master"] += time.monotonic() - t0
        if msol.status is MipStatus.TIME_LIMIT:
            lb = max(lb, msol.bound)
            status = "timed_out"
            break
        if not msol.has_incumbent:
            if math.isinf(ub):
                status = "infeasible"
            else:
                status = "optimal"  # cannot happen with valid cuts; kept defensive
            break
        lb = max(lb, msol.bound)
        x = msol.x
        t0 = time.monotonic()
        # earlier incumbents of this master solve are complete schedules
        # too; planning them can only improve the upper bound
        for point in msol.incumbents[:-1]:
            ms = window_points(point)
            got = [plan_window(m) for m in ms]
            if any(g is None or g[0] is not PlanStatus.OPTIMAL for g in got):
                continue
            total = sum(g[1].cost for g in got)
            if total < ub:
                ub, best_m, best_plans = total, [list(m) for m in ms], [g[1] for g in got]
        timings["plan"] += time.monotonic() - t0
        added = 0
        window_costs: List[int] = []
        plans: List[Plan] = []
        m_now: List[List[int]] = []
        t0 = time.monotonic()
        for w, m_bar in enumerate(window_points(x)):
            eta_bar = x[master.eta_var(w)]
            m_now.append(list(m_bar))
            got = plan_window(m_bar)
            if got is None:
                status = "timed_out"
                break
            pst, plan = got
            if pst is PlanStatus.INFEASIBLE:
                for c in with_copies(make_lbbd_feas_cut(instance, w, m_bar, config.feas_cut_rhs)):
                    added += add_cut(c)
                continue
            window_costs.append(plan.cost)
            plans.append(plan)
            if plan.cost > eta_bar + VIOL_TOL * max(1.0, plan.cost):
                for c in with_copies(make_lbbd_opt_cut(instance, w, m_bar, plan.cost)):
                    added += add_cut(c)
        timings["plan"] += time.monotonic() - t0
        if status == "timed_out":
            break
        if len(window_costs) == W:
            total = sum(window_costs)
            if total < ub:
                ub = total
                best_m = m_now
                best_plans = plans
        history.append((lb, ub))
        gap = _gap(ub, lb)
        log.info("iteration %d: LB %.1f UB %s gap %s cuts %s", it, lb, ub, gap, counts)
        if gap <= config.target_gap + 1e-12 or (added == 0 and gap_now == 0.0):
            status = "optimal" if gap <= 1e-9 or (added == 0 and gap_now == 0.0) else "gap_reached"
            break
        if it >= config.max_iterations:
            status = "timed_out"
            break
    timings["total"] = time.monotonic() - t_start
    cost = None if math.isinf(ub) else int(ub)
    return SolveReport(
        status=status,
        cost=cost,
        lb=lb if status != "infeasible" else math.inf,
        gap=_gap(ub, lb) if cost is not None else math.inf,
        iterations=it,
        cuts=counts,
        columns=len(cg.pool),
        m=best_m,
        plans=best_plans,
        timings=timings,
        cut_log=cuts,
        history=history,
        probes=list(cg.probes),
    )


def _gap(ub: float, lb: float) -> float:
    if math.isinf(ub):
        return math.inf
    if ub <= 0:
        return 0.0 if lb >= ub - 1e-9 else math.inf
    return max(0.0, (ub - lb) / ub)
