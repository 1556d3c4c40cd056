"""``netmigrate`` command line: generate, solve, oracle, report.

Exit codes: 0 success, 1 invalid input, 2 a size or search limit was hit.
Set ``MIGRATE_LOG`` (e.g. ``INFO``) for progress logging on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

from .instance import InstanceError, eunetworks, generate_instance, generate_tiny_instance, load_instance, load_topology
from .lbbd import Config, run
from .mip import NodeLimitError
from .oracle import OracleLimitError, OracleLimits, solve_exact
from .pricing import RegionTooLarge
from .report import csv_row, summarize, to_csv

log = logging.getLogger("netmigrate")

LIMIT_ERRORS = (OracleLimitError, RegionTooLarge, NodeLimitError)


def _write(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _parse_limits(spec: Optional[str]) -> OracleLimits:
    if not spec:
        return OracleLimits()
    if spec.lstrip().startswith("{"):
        fields = json.loads(spec)
    else:
        fields = {}
        for part in spec.split(","):
            key, _, value = part.partition("=")
            fields[key.strip()] = int(value)
    try:
        return OracleLimits(**{k: int(v) for k, v in fields.items()})
    except TypeError as exc:
        raise ValueError(f"unknown oracle limit in {spec!r}") from exc


def cmd_generate(args) -> int:
    if args.tiny:
        inst = generate_tiny_instance(args.seed, infeasible=args.infeasible)
    else:
        topo = load_topology(args.topology) if args.topology else eunetworks()
        inst = generate_instance(topo, args.mu, args.sigma, args.seed, windows=args.windows,
                                 eta_cir=args.eta_cir, name=args.name)
    _write(inst.dumps(), args.out)
    return 0


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    cfg = Config(
        target_gap=args.gap,
        time_limit_s=args.time_limit,
        propagate=not args.no_propagate,
        pricing_mode=args.pricing,
        keep_columns=not args.drop_columns,
        seed=args.seed,
    )
    rep = run(inst, cfg)
    doc = rep.to_dict(inst, cfg)
    _write(json.dumps(doc, indent=1, sort_keys=True) + "\n", args.out)
    csv_path = args.report or (str(Path(args.out).with_suffix(".csv")) if args.out else None)
    if csv_path:
        Path(csv_path).write_text(to_csv([csv_row(doc, summarize(doc, inst))]))
    log.info("status %s cost %s gap %s in %.1fs", rep.status, rep.cost, rep.gap, rep.timings.get("total", 0.0))
    return 0


def cmd_oracle(args) -> int:
    inst = load_instance(args.instance)
    res = solve_exact(inst, _parse_limits(args.oracle_limits))
    doc = {
        "instance": inst.name,
        "status": "optimal" if res.feasible else "infeasible",
        "cost_cents": res.cost,
        "m": res.m,
        "windows": [p.to_dict(inst) for p in res.plans],
    }
    _write(json.dumps(doc, indent=1, sort_keys=True) + "\n", args.out)
    return 0


def cmd_report(args) -> int:
    inst = load_instance(args.instance)
    rows = []
    for path in args.solution:
        doc = json.loads(Path(path).read_text())
        rows.append(csv_row(doc, summarize(doc, inst)))
    _write(to_csv(rows), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="netmigrate", description="Network migration scheduling solver")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic instance")
    g.add_argument("--topology", help="topology JSON (default: bundled EUNetworks skeleton)")
    g.add_argument("--mu", type=float, default=5.0, help="mean endpoints per site")
    g.add_argument("--sigma", type=float, default=2.5, help="std. dev. of endpoints per site")
    g.add_argument("--windows", type=int, default=3)
    g.add_argument("--eta-cir", type=int, default=30, help="circuits per window")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--name")
    g.add_argument("--tiny", action="store_true", help="small random instance for oracle checks")
    g.add_argument("--infeasible", action="store_true", help="with --tiny: cut a resource so no schedule exists")
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="run the decomposition solver")
    s.add_argument("--instance", required=True)
    s.add_argument("--out", help="solution JSON (default: stdout)")
    s.add_argument("--report", help="CSV summary path (default: next to --out)")
    s.add_argument("--gap", type=float, default=0.10, help="target relative gap")
    s.add_argument("--time-limit", type=float, default=10800.0, help="seconds")
    s.add_argument("--no-propagate", action="store_true", help="do not copy cuts to every window")
    s.add_argument("--pricing", choices=["ordered", "hybrid", "general"], default="hybrid")
    s.add_argument("--drop-columns", action="store_true", help="start every subproblem from an empty pool")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_solve)

    o = sub.add_parser("oracle", help="exhaustive solve of a tiny instance")
    o.add_argument("--instance", required=True)
    o.add_argument("--oracle-limits", help="e.g. 'max_circuits=8,max_sites=6' or a JSON object")
    o.add_argument("--out")
    o.set_defaults(func=cmd_oracle)

    r = sub.add_parser("report", help="CSV metrics of solution files")
    r.add_argument("--instance", required=True)
    r.add_argument("--solution", required=True, nargs="+")
    r.add_argument("--out")
    r.set_defaults(func=cmd_report)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    level = os.environ.get("MIGRATE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except LIMIT_ERRORS as exc:
        print(f"limit error ({type(exc).__module__}): {exc}", file=sys.stderr)
        return 2
    except (InstanceError, json.JSONDecodeError, ValueError, KeyError, OSError) as exc:
        print(f"invalid input ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
