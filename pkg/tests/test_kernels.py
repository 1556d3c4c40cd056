"""The compiled kernels must agree with the pure-Python reference exactly."""

import itertools
import os
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netmigrate import _kernels_py as ref
from netmigrate import kernels

compiled = pytest.importorskip("netmigrate._kernels")


@st.composite
def sym_matrix(draw, max_k=6):
    k = draw(st.integers(1, max_k))
    T = [[0] * k for _ in range(k)]
    for i in range(k):
        for j in range(i + 1, k):
            T[i][j] = T[j][i] = draw(st.integers(0, 300))
    return T


def brute_open_path(T, mask):
    sites = [i for i in range(len(T)) if mask >> i & 1]
    return min(sum(T[a][b] for a, b in zip(p, p[1:])) for p in itertools.permutations(sites))


@given(sym_matrix())
@settings(max_examples=60, deadline=None)
def test_path_kernels_agree(T):
    k = len(T)
    hp = ref.subset_path_lengths(T, k)
    assert compiled.subset_path_lengths(T, k) == hp
    assert compiled.ordered_path_lengths(T, k) == ref.ordered_path_lengths(T, k)
    assert compiled.superset_min(hp, k) == ref.superset_min(hp, k)
    for mask in range(1, 1 << k):
        assert hp[mask] == brute_open_path(T, mask)


@given(sym_matrix(max_k=5), st.data())
@settings(max_examples=60, deadline=None)
def test_greedy_sweep_agrees(T, data):
    k = len(T)
    n = data.draw(st.integers(0, 6))
    site = [data.draw(st.integers(0, k - 1)) for _ in range(n)]
    dual = sorted((data.draw(st.floats(-5, 50000, allow_nan=False)) for _ in range(n)), reverse=True)
    cap = [data.draw(st.integers(1, 5)) for _ in range(n)]
    group = [data.draw(st.integers(-1, 2)) for _ in range(n)]
    travel = ref.superset_min(ref.subset_path_lengths(T, k), k)
    args = (travel, k, site, dual, cap, group, [120, 240], [27200.0, 54400.0], 30, -10.0)
    assert compiled.greedy_sweep(*args) == ref.greedy_sweep(*args)


@given(st.data())
@settings(max_examples=100, deadline=None)
def test_transport_agrees_with_brute_force(data):
    nw = data.draw(st.integers(1, 3))
    ns = data.draw(st.integers(1, 3))
    caps = [data.draw(st.integers(0, 3)) for _ in range(nw)]
    demands = [data.draw(st.integers(0, 3)) for _ in range(ns)]
    allowed = [[data.draw(st.booleans()) for _ in range(ns)] for _ in range(nw)]
    a = ref.transport_feasible(caps, demands, allowed)
    b = compiled.transport_feasible(caps, demands, allowed)
    assert (a is None) == (b is None)
    # brute force over all integral allocations
    cells = [(j, i) for j in range(nw) for i in range(ns) if allowed[j][i]]
    exists = False
    for vals in itertools.product(range(4), repeat=len(cells)):
        load = [0] * nw
        got = [0] * ns
        for (j, i), v in zip(cells, vals):
            load[j] += v
            got[i] += v
        if got == demands and all(l <= c for l, c in zip(load, caps)):
            exists = True
            break
    assert exists == (a is not None)
    for flow in (a, b):
        if flow is not None:
            assert [sum(flow[j][i] for j in range(nw)) for i in range(ns)] == demands
            assert all(sum(flow[j]) <= caps[j] for j in range(nw))
            assert all(flow[j][i] == 0 or allowed[j][i] for j in range(nw) for i in range(ns))


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")


def test_env_forces_python_backend():
    env = dict(os.environ, NETMIGRATE_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import netmigrate.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
