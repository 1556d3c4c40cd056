"""Compare the compiled and pure-Python kernel backends.

Usage: python3 benchmarks/bench_kernels.py [--sites 10] [--repeat 5]

Each kernel runs on the same random inputs under both backends; the
script checks that the results agree and prints the median timing and the
speed-up. A final row times window-LP and plan evaluations for 30 random
migration vectors of a half-scale EUNetworks instance with each backend.
"""

import argparse
import os
import random
import statistics
import subprocess
import sys
import time

from netmigrate import _kernels_py

try:
    from netmigrate import _kernels as _kernels_c
except ImportError:  # extension not built
    _kernels_c = None


def _time(fn, repeat):
    samples = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples), out


def _inputs(k, seed):
    rng = random.Random(seed)
    T = [[0 if i == j else rng.randint(10, 120) for j in range(k)] for i in range(k)]
    for i in range(k):
        for j in range(i):
            T[i][j] = T[j][i]
    items = sorted(((rng.random() * 5000, rng.randrange(k), rng.randint(1, 6), rng.choice([-1, rng.randrange(8)]))
                    for _ in range(3 * k)), reverse=True)
    caps = [rng.randint(5, 20) for _ in range(8)]
    demands = [rng.randint(0, 6) for _ in range(12)]
    allowed = [[rng.random() < 0.6 for _ in range(12)] for _ in range(8)]
    return T, items, caps, demands, allowed


def kernel_cases(mod, k, seed):
    T, items, caps, demands, allowed = _inputs(k, seed)
    hp = _kernels_py.subset_path_lengths(T, k)
    eff = _kernels_py.superset_min(hp, k)
    durations, costs = [360, 480], [81600.0, 108800.0]
    sweep_args = (eff, k, [it[1] for it in items], [it[0] for it in items], [it[2] for it in items],
                  [it[3] for it in items], durations, costs, 20, 0.0)
    return {
        "subset_path_lengths": lambda: mod.subset_path_lengths(T, k),
        "ordered_path_lengths": lambda: mod.ordered_path_lengths(T, k),
        "superset_min": lambda: mod.superset_min(hp, k),
        "greedy_sweep": lambda: mod.greedy_sweep(*sweep_args),
        "transport_feasible": lambda: mod.transport_feasible(caps, demands, allowed),
    }


def _window_lp_seconds(pure: bool) -> float:
    code = (
        "import random, time\n"
        "from netmigrate.instance import generate_instance, eunetworks\n"
        "from netmigrate.colgen import CgSolver\n"
        "from netmigrate.plan import solve_plan\n"
        "inst = generate_instance(eunetworks(), 2.5, 1.25, 0, windows=3, eta_cir=15)\n"
        "rng = random.Random(0)\n"
        "ms = [[rng.randint(0, f) for f in inst.phi] for _ in range(30)]\n"
        "t0 = time.perf_counter()\n"
        "cg = CgSolver(inst)\n"
        "for m in ms:\n"
        "    cg.evaluate(m)\n"
        "    solve_plan(inst, m)\n"
        "print(time.perf_counter() - t0)\n"
    )
    env = dict(os.environ, NETMIGRATE_PURE_PYTHON="1" if pure else "0")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sites", type=int, default=10, help="region size for the subset kernels")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if _kernels_c is None:
        print("compiled extension not built; run `pip install -e . --no-build-isolation` first")
        return 1
    py_cases = kernel_cases(_kernels_py, args.sites, args.seed)
    c_cases = kernel_cases(_kernels_c, args.sites, args.seed)
    print(f"{'kernel':<22}{'python [ms]':>13}{'cython [ms]':>13}{'speed-up':>10}  agree")
    for name in py_cases:
        tp, rp = _time(py_cases[name], args.repeat)
        tc, rc = _time(c_cases[name], args.repeat)
        print(f"{name:<22}{tp * 1e3:>13.3f}{tc * 1e3:>13.3f}{tp / max(tc, 1e-12):>9.1f}x  {list(rp or []) == list(rc or [])}")
    tp, tc = _window_lp_seconds(True), _window_lp_seconds(False)
    print(f"{'30 windows end to end':<22}{tp * 1e3:>13.1f}{tc * 1e3:>13.1f}{tp / max(tc, 1e-12):>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
