"""Managerial metrics recomputed from a solution document's plans."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .instance import Instance

CSV_COLUMNS = [
    "instance", "status", "cost_cents", "lb_cents", "gap", "iterations",
    "cuts_bd_feas", "cuts_bd_opt", "cuts_lbbd_feas", "cuts_lbbd_opt", "cuts_bd_count", "cuts_bd_region_count",
    "columns", "shifts", "wf",
]


@dataclass
class WindowSummary:
    cost: int = 0
    shifts: int = 0
    migration_min: int = 0
    travel_min: int = 0
    shift_min: int = 0


@dataclass
class Report:
    cost: int = 0
    shifts: int = 0
    histogram: Dict[int, int] = field(default_factory=dict)
    working_fraction: float = 0.0
    windows: List[WindowSummary] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "cost_cents": self.cost,
            "shifts": self.shifts,
            "duration_histogram": {str(k): v for k, v in sorted(self.histogram.items())},
            "working_fraction": self.working_fraction,
            "windows": [vars(w) for w in self.windows],
        }


def summarize(solution: dict, instance: Instance) -> Report:
    """Cost, shift counts, duration histogram and working fraction of a solution.

    Only the plans are read: cost is recomputed from shift durations,
    migration time from visit lengths and travel from the visit sequence.
    """
    rep = Report(histogram={d: 0 for d in instance.resources.durations})
    T = instance.T
    busy = 0
    paid = 0
    for win in solution.get("windows", []):
        ws = WindowSummary()
        for sh in win["shifts"]:
            d = int(sh["duration_min"])
            ws.shifts += 1
            ws.cost += instance.shift_cost(d)
            ws.shift_min += d
            rep.histogram[d] = rep.histogram.get(d, 0) + 1
            prev = None
            for v in sh["visits"]:
                ws.migration_min += int(v["end_min"]) - int(v["start_min"])
                if prev is not None:
                    ws.travel_min += T[prev][int(v["site"])]
                prev = int(v["site"])
        rep.windows.append(ws)
        rep.cost += ws.cost
        rep.shifts += ws.shifts
        busy += ws.migration_min + ws.travel_min
        paid += ws.shift_min
    rep.working_fraction = busy / paid if paid else 0.0
    return rep


def csv_row(solution: dict, report: Report) -> Dict[str, object]:
    cuts = solution.get("cuts", {})
    return {
        "instance": solution.get("instance", ""),
        "status": solution.get("status", ""),
        "cost_cents": report.cost if solution.get("cost_cents") is not None else "",
        "lb_cents": "" if solution.get("lb_cents") is None else solution["lb_cents"],
        "gap": "" if solution.get("gap") is None else solution["gap"],
        "iterations": solution.get("iterations", 0),
        "cuts_bd_feas": cuts.get("bd_feas", 0),
        "cuts_bd_opt": cuts.get("bd_opt", 0),
        "cuts_lbbd_feas": cuts.get("lbbd_feas", 0),
        "cuts_lbbd_opt": cuts.get("lbbd_opt", 0),
        "cuts_bd_count": cuts.get("bd_count", 0),
        "cuts_bd_region_count": cuts.get("bd_region_count", 0),
        "columns": solution.get("columns", 0),
        "shifts": report.shifts,
        "wf": f"{report.working_fraction:.6f}",
    }


def to_csv(rows: List[Dict[str, object]], out: Optional[io.TextIOBase] = None) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow(r)
    text = buf.getvalue()
    if out is not None:
        out.write(text)
    return text
