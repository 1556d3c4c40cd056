"""Small linear-programming layer: a mutable model plus a solve call that
returns primal values, row duals and status.

The simplex itself is HiGHS (through ``highspy``); this module fixes the
row/dual conventions the rest of the package relies on:
minimization, rows ``a.x {<=,>=,=} b``, and duals ``y`` with
``c - A^T y >= 0`` at optimality, so ``>=`` rows have ``y >= 0`` and
``<=`` rows have ``y <= 0``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import highspy
import numpy as np

FEAS_TOL = 1e-7
INF = math.inf

Coeffs = Union[Mapping[int, float], Sequence[float]]
Row = Tuple[Dict[int, float], str, float]


class NumericalError(RuntimeError):
    """The LP engine stopped without a trustworthy answer."""


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


_SENSES = ("<=", ">=", "=")


class LpModel:
    """Minimization LP built incrementally by variables, rows and columns."""

    def __init__(self) -> None:
        self.obj: List[float] = []
        self.lb: List[float] = []
        self.ub: List[float] = []
        self.rows: List[Dict[int, float]] = []
        self.senses: List[str] = []
        self.rhs: List[float] = []

    @property
    def num_vars(self) -> int:
        return len(self.obj)

    @property
    def num_rows(self) -> int:
        return len(self.rows)

    def add_variable(self, obj: float = 0.0, lb: float = 0.0, ub: float = INF) -> int:
        if lb > ub:
            raise ValueError(f"variable bounds {lb} > {ub}")
        self.obj.append(float(obj))
        self.lb.append(float(lb))
        self.ub.append(float(ub))
        return len(self.obj) - 1

    def add_constraint(self, coeffs: Coeffs, sense: str, rhs: float) -> int:
        if sense not in _SENSES:
            raise ValueError(f"unknown sense {sense!r}")
        row = _as_sparse(coeffs)
        for j in row:
            if not 0 <= j < self.num_vars:
                raise ValueError(f"row references undeclared variable {j}")
        self.rows.append(row)
        self.senses.append(sense)
        self.rhs.append(float(rhs))
        return len(self.rows) - 1

    def add_column(self, obj: float, coeffs: Sequence[float], lb: float = 0.0, ub: float = INF) -> int:
        """Append a variable whose entries in the existing rows are ``coeffs``."""
        if len(coeffs) != self.num_rows:
            raise ValueError(f"column has {len(coeffs)} entries for {self.num_rows} rows")
        j = self.add_variable(obj, lb, ub)
        for i, a in enumerate(coeffs):
            if a:
                self.rows[i][j] = float(a)
        return j

    def copy(self) -> "LpModel":
        other = LpModel()
        other.obj = list(self.obj)
        other.lb = list(self.lb)
        other.ub = list(self.ub)
        other.rows = [dict(r) for r in self.rows]
        other.senses = list(self.senses)
        other.rhs = list(self.rhs)
        return other

    def row_activity(self, i: int, x: Sequence[float]) -> float:
        return sum(a * x[j] for j, a in self.rows[i].items())


def add_column(model: LpModel, obj: float, coeffs: Sequence[float]) -> int:
    return model.add_column(obj, coeffs)


def _as_sparse(coeffs: Coeffs) -> Dict[int, float]:
    if isinstance(coeffs, Mapping):
        return {int(j): float(a) for j, a in coeffs.items() if a}
    return {j: float(a) for j, a in enumerate(coeffs) if a}


@dataclass
class LpSolution:
    status: LpStatus
    x: List[float] = field(default_factory=list)
    duals: List[float] = field(default_factory=list)
    objective: float = math.nan
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


_HINF = highspy.kHighsInf
_MS = highspy.HighsModelStatus


def _bound(v: float) -> float:
    if math.isinf(v):
        return _HINF if v > 0 else -_HINF
    return v


def _row_bounds(sense: str, rhs: float) -> Tuple[float, float]:
    if sense == "<=":
        return -_HINF, rhs
    if sense == ">=":
        return rhs, _HINF
    return rhs, rhs


class LpSession:
    """A model loaded into a persistent HiGHS instance.

    Re-solves after bound changes or added rows/columns start from the
    previous basis. Rows and columns added through the session are mirrored
    into ``model``.
    """

    def __init__(self, model: LpModel, iteration_limit: int = 10**6):
        self.model = model
        h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        h.setOptionValue("presolve", "off")
        h.setOptionValue("simplex_iteration_limit", int(iteration_limit))
        self.h = h
        n = model.num_vars
        if n:
            h.addVars(n, np.array([_bound(v) for v in model.lb]), np.array([_bound(v) for v in model.ub]))
            h.changeColsCost(n, np.arange(n, dtype=np.int32), np.array(model.obj, dtype=float))
        for row, sense, rhs in zip(model.rows, model.senses, model.rhs):
            self._push_row(row, sense, rhs)
        self._bounds = (list(model.lb), list(model.ub))

    def _push_row(self, row: Dict[int, float], sense: str, rhs: float) -> None:
        lo, hi = _row_bounds(sense, rhs)
        idx = np.fromiter(row.keys(), dtype=np.int32, count=len(row))
        val = np.fromiter(row.values(), dtype=float, count=len(row))
        self.h.addRow(lo, hi, len(row), idx, val)

    def add_constraint(self, coeffs: Coeffs, sense: str, rhs: float) -> int:
        i = self.model.add_constraint(coeffs, sense, rhs)
        self._push_row(self.model.rows[i], sense, float(rhs))
        return i

    def add_variable(self, obj: float = 0.0, lb: float = 0.0, ub: float = INF) -> int:
        return self.add_column(obj, {}, lb, ub)

    def add_column(self, obj: float, coeffs: Coeffs, lb: float = 0.0, ub: float = INF) -> int:
        """New variable with entries ``coeffs`` (row -> value) in existing rows."""
        sparse = _as_sparse(coeffs)
        j = self.model.add_variable(obj, lb, ub)
        for i, a in sparse.items():
            if not 0 <= i < self.model.num_rows:
                raise ValueError(f"column references missing row {i}")
            self.model.rows[i][j] = a
        idx = np.fromiter(sparse.keys(), dtype=np.int32, count=len(sparse))
        val = np.fromiter(sparse.values(), dtype=float, count=len(sparse))
        self.h.addCol(float(obj), _bound(lb), _bound(ub), len(sparse), idx, val)
        self._bounds[0].append(float(lb))
        self._bounds[1].append(float(ub))
        return j

    def set_rhs(self, i: int, rhs: float) -> None:
        self.model.rhs[i] = float(rhs)
        lo, hi = _row_bounds(self.model.senses[i], float(rhs))
        self.h.changeRowBounds(i, lo, hi)

    def set_objective(self, obj: Sequence[float]) -> None:
        n = self.model.num_vars
        self.model.obj = [float(c) for c in obj]
        if n:
            self.h.changeColsCost(n, np.arange(n, dtype=np.int32), np.array(self.model.obj))

    def solve(self, lb: Optional[Sequence[float]] = None, ub: Optional[Sequence[float]] = None) -> LpSolution:
        model = self.model
        n = model.num_vars
        lo = list(model.lb if lb is None else lb)
        hi = list(model.ub if ub is None else ub)
        if any(a > b for a, b in zip(lo, hi)):
            return LpSolution(LpStatus.INFEASIBLE)
        if n == 0:
            # only constant rows: feasible iff every row holds at zero
            for s, b in zip(model.senses, model.rhs):
                if (s == "<=" and b < -FEAS_TOL) or (s == ">=" and b > FEAS_TOL) or (s == "=" and abs(b) > FEAS_TOL):
                    return LpSolution(LpStatus.INFEASIBLE)
            return LpSolution(LpStatus.OPTIMAL, [], [0.0] * model.num_rows, 0.0)
        if (lo, hi) != tuple(self._bounds):
            changed = [j for j in range(n) if lo[j] != self._bounds[0][j] or hi[j] != self._bounds[1][j]]
            self.h.changeColsBounds(len(changed), np.array(changed, dtype=np.int32),
                                    np.array([_bound(lo[j]) for j in changed]),
                                    np.array([_bound(hi[j]) for j in changed]))
            self._bounds = (lo, hi)
        h = self.h
        h.run()
        st = h.getModelStatus()
        info = h.getInfo()
        iters = int(info.simplex_iteration_count)
        if st == _MS.kUnboundedOrInfeasible:
            # settle the ambiguity with a cold primal simplex
            h.clearSolver()
            h.setOptionValue("simplex_strategy", 4)
            h.run()
            h.setOptionValue("simplex_strategy", 1)
            st = h.getModelStatus()
        if st == _MS.kInfeasible:
            return LpSolution(LpStatus.INFEASIBLE, iterations=iters)
        if st == _MS.kUnbounded:
            return LpSolution(LpStatus.UNBOUNDED, iterations=iters)
        if st != _MS.kOptimal:
            raise NumericalError(f"LP solve failed: {h.modelStatusToString(st)}")
        sol = h.getSolution()
        duals = [float(v) for v in sol.row_dual]
        scale = 1.0 + max((abs(c) for c in model.obj), default=0.0)
        for i, s in enumerate(model.senses):
            y = duals[i]
            if (s == ">=" and y < -FEAS_TOL * scale) or (s == "<=" and y > FEAS_TOL * scale):
                raise NumericalError(f"dual of {s} row {i} has wrong sign: {y}")
            # clamp solver noise onto the right side of zero
            if (s == ">=" and y < 0) or (s == "<=" and y > 0):
                duals[i] = 0.0
        return LpSolution(LpStatus.OPTIMAL, [float(v) for v in sol.col_value], duals,
                          float(info.objective_function_value), iters)


def solve_lp(model: LpModel, iteration_limit: int = 10**6,
             lb: Optional[Sequence[float]] = None, ub: Optional[Sequence[float]] = None) -> LpSolution:
    """Solve ``model`` once; ``lb``/``ub`` optionally override the variable bounds."""
    return LpSession(model, iteration_limit).solve(lb, ub)
