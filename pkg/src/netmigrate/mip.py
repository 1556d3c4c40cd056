"""Best-bound branch-and-bound over :mod:`netmigrate.lp` with a lazy-cut
hook at LP-integral nodes."""

from __future__ import annotations

import enum
import heapq
import itertools
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Set, Tuple

from .lp import LpModel, LpSession, LpStatus, Row

log = logging.getLogger(__name__)

INT_TOL = 1e-6
GAP_EPS = 1e-9

Separator = Callable[[List[float]], List[Row]]


class NodeLimitError(RuntimeError):
    pass


class MipStatus(enum.Enum):
    OPTIMAL = "optimal"
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    TIME_LIMIT = "time_limit"


@dataclass
class MipModel:
    lp: LpModel
    integer: Set[int] = field(default_factory=set)

    def __post_init__(self):
        bad = [j for j in self.integer if not 0 <= j < self.lp.num_vars]
        if bad:
            raise ValueError(f"integrality marks reference undeclared variables {bad}")

    def add_integer_variable(self, obj: float = 0.0, lb: float = 0.0, ub: float = math.inf) -> int:
        j = self.lp.add_variable(obj, lb, ub)
        self.integer.add(j)
        return j


@dataclass
class MipSolution:
    status: MipStatus
    x: List[float] = field(default_factory=list)
    objective: float = math.inf
    bound: float = -math.inf
    gap: float = math.inf
    nodes: int = 0
    cuts_added: int = 0
    bound_trace: List[float] = field(default_factory=list)
    incumbents: List[List[float]] = field(default_factory=list)  # every improving point, in order found

    @property
    def has_incumbent(self) -> bool:
        return bool(self.x)


def relative_gap(incumbent: float, bound: float) -> float:
    if math.isinf(incumbent):
        return math.inf
    return max(0.0, (incumbent - bound) / max(abs(incumbent), GAP_EPS))


def branch_select(x: Sequence[float], integer: Optional[Sequence[int]] = None) -> Optional[int]:
    """Most fractional integer variable, lowest index on ties; ``None`` if integral."""
    candidates = range(len(x)) if integer is None else sorted(integer)
    best, best_score = None, math.inf
    for j in candidates:
        frac = x[j] - math.floor(x[j])
        if frac <= INT_TOL or frac >= 1 - INT_TOL:
            continue
        score = abs(frac - 0.5)
        if score < best_score - 1e-12:
            best, best_score = j, score
    return best


def _violation(row: Row, x: Sequence[float]) -> float:
    coeffs, sense, rhs = row
    act = sum(a * x[j] for j, a in coeffs.items())
    if sense == "<=":
        return act - rhs
    if sense == ">=":
        return rhs - act
    return abs(act - rhs)


def solve_mip(
    model: MipModel,
    rel_gap: float = 0.0,
    lazy_separator: Optional[Separator] = None,
    node_limit: int = 10**6,
    time_limit: Optional[float] = None,
) -> MipSolution:
    """Minimize ``model`` to within ``rel_gap``.

    At every LP-integral node the separator (if any) is called with the
    point; returned rows are added to the model for good and the node is
    re-solved. A point only becomes incumbent when the separator returns
    nothing.
    """
    if not 0.0 <= rel_gap < 1.0:
        raise ValueError("rel_gap must lie in [0, 1)")
    lp = model.lp
    session = LpSession(lp)
    ints = sorted(model.integer)
    deadline = None if time_limit is None else time.monotonic() + time_limit
    counter = itertools.count()
    # node = (bound, seq, bound overrides {var: (lo, hi)})
    heap: List[Tuple[float, int, Dict[int, Tuple[float, float]]]] = [(-math.inf, next(counter), {})]
    inc_x: List[float] = []
    inc_obj = math.inf
    best_bound = -math.inf
    nodes = 0
    cuts_added = 0
    status = None
    trace: List[float] = []
    found: List[List[float]] = []

    while heap:
        # nodes at or above the incumbent are about to be pruned, so the
        # incumbent caps the global bound
        best_bound = max(best_bound, min(heap[0][0], inc_obj))
        trace.append(best_bound)
        if inc_x and relative_gap(inc_obj, best_bound) <= rel_gap:
            break
        if deadline is not None and time.monotonic() > deadline:
            status = MipStatus.TIME_LIMIT
            break
        if nodes >= node_limit:
            raise NodeLimitError(f"node limit {node_limit} reached")
        bound, _, over = heapq.heappop(heap)
        if bound >= inc_obj - 1e-9 * max(1.0, abs(inc_obj)):
            continue
        nodes += 1
        lo = list(lp.lb)
        hi = list(lp.ub)
        for j, (a, b) in over.items():
            lo[j], hi[j] = a, b
        sol = session.solve(lb=lo, ub=hi)
        if sol.status is LpStatus.INFEASIBLE:
            continue
        if sol.status is LpStatus.UNBOUNDED:
            raise ValueError("MIP relaxation is unbounded")
        if sol.objective >= inc_obj - 1e-9 * max(1.0, abs(inc_obj)):
            continue
        j = branch_select(sol.x, ints)
        if j is None:
            point = list(sol.x)
            for k in ints:
                point[k] = float(round(point[k]))
            cuts = lazy_separator(point) if lazy_separator is not None else []
            if cuts:
                if max(_violation(c, point) for c in cuts) <= 1e-9:
                    raise RuntimeError("lazy separator returned cuts that do not cut off the point")
                for coeffs, sense, rhs in cuts:
                    session.add_constraint(coeffs, sense, rhs)
                cuts_added += len(cuts)
                heapq.heappush(heap, (max(bound, sol.objective), next(counter), over))
                continue
            inc_x, inc_obj = point, sol.objective
            found.append(point)
            log.debug("incumbent %.6g at node %d", inc_obj, nodes)
            continue
        v = sol.x[j]
        down = dict(over)
        down[j] = (lo[j], math.floor(v))
        up = dict(over)
        up[j] = (math.ceil(v), hi[j])
        node_bound = max(bound, sol.objective)
        heapq.heappush(heap, (node_bound, next(counter), down))
        heapq.heappush(heap, (node_bound, next(counter), up))

    if not heap and status is None:
        best_bound = inc_obj if inc_x else math.inf
    if not inc_x:
        return MipSolution(status or MipStatus.INFEASIBLE, bound=best_bound, nodes=nodes,
                           cuts_added=cuts_added, bound_trace=trace, incumbents=found)
    best_bound = min(best_bound, inc_obj)
    gap = relative_gap(inc_obj, best_bound)
    if status is None:
        status = MipStatus.OPTIMAL if gap <= GAP_EPS else MipStatus.FEASIBLE
    trace.append(best_bound)
    return MipSolution(status, inc_x, inc_obj, best_bound, gap, nodes, cuts_added, trace, found)
