# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_kernels_py``; same signatures."""

from libc.stdlib cimport malloc, calloc, free

cdef long long INF = 1LL << 60


cdef long long* _matrix(T, int k) except NULL:
    cdef long long* m = <long long*> malloc(sizeof(long long) * k * k)
    if m == NULL:
        raise MemoryError()
    cdef int i, j
    for i in range(k):
        row = T[i]
        for j in range(k):
            m[i * k + j] = row[j]
    return m


def subset_path_lengths(T, int k):
    cdef int full = 1 << k
    cdef long long* tm = _matrix(T, k)
    cdef long long* dp = <long long*> malloc(sizeof(long long) * full * k)
    cdef int mask, last, nxt, bit
    cdef long long cur, cand, best
    if dp == NULL:
        free(tm)
        raise MemoryError()
    try:
        for mask in range(full * k):
            dp[mask] = INF
        for last in range(k):
            dp[(1 << last) * k + last] = 0
        for mask in range(1, full):
            for last in range(k):
                cur = dp[mask * k + last]
                if cur >= INF:
                    continue
                for nxt in range(k):
                    bit = 1 << nxt
                    if mask & bit:
                        continue
                    cand = cur + tm[last * k + nxt]
                    if cand < dp[(mask | bit) * k + nxt]:
                        dp[(mask | bit) * k + nxt] = cand
        out = [0] * full
        for mask in range(1, full):
            best = INF
            for last in range(k):
                if dp[mask * k + last] < best:
                    best = dp[mask * k + last]
            out[mask] = best
        return out
    finally:
        free(dp)
        free(tm)


def ordered_path_lengths(T, int k):
    cdef int full = 1 << k
    cdef long long* tm = _matrix(T, k)
    cdef int mask, i, prev
    cdef long long total
    try:
        out = [0] * full
        for mask in range(1, full):
            prev = -1
            total = 0
            for i in range(k):
                if (mask >> i) & 1:
                    if prev >= 0:
                        total += tm[prev * k + i]
                    prev = i
            out[mask] = total
        return out
    finally:
        free(tm)


def superset_min(values, int k):
    cdef int full = 1 << k
    cdef long long* v = <long long*> malloc(sizeof(long long) * full)
    cdef int b, mask, bit
    if v == NULL:
        raise MemoryError()
    try:
        for mask in range(full):
            v[mask] = values[mask]
        for b in range(k):
            bit = 1 << b
            for mask in range(full):
                if not (mask & bit):
                    if v[mask | bit] < v[mask]:
                        v[mask] = v[mask | bit]
        return [v[mask] for mask in range(full)]
    finally:
        free(v)


def greedy_sweep(travel, int k, item_site, item_dual, item_cap, item_group,
                 durations, costs, long long theta, double const):
    cdef int nd = len(durations)
    cdef int full = 1 << k
    cdef int n_items = len(item_site)
    cdef int max_group = 0
    cdef int it, mask, d, g
    cdef long long trav, slack, budget, n, taken
    cdef double gain, dual
    cdef double inf = float("inf")
    for it in range(n_items):
        if item_group[it] + 1 > max_group:
            max_group = item_group[it] + 1
    cdef int* site = <int*> malloc(sizeof(int) * (n_items + 1))
    cdef int* grp = <int*> malloc(sizeof(int) * (n_items + 1))
    cdef long long* cap = <long long*> malloc(sizeof(long long) * (n_items + 1))
    cdef double* dv = <double*> malloc(sizeof(double) * (n_items + 1))
    cdef char* used = <char*> calloc(max_group + 1, sizeof(char))
    cdef long long* tv = <long long*> malloc(sizeof(long long) * full)
    cdef long long* dur = <long long*> malloc(sizeof(long long) * (nd + 1))
    cdef double* cst = <double*> malloc(sizeof(double) * (nd + 1))
    cdef double* rc = <double*> malloc(sizeof(double) * full * nd)
    try:
        for it in range(n_items):
            site[it] = item_site[it]
            grp[it] = item_group[it]
            cap[it] = item_cap[it]
            dv[it] = item_dual[it]
        for mask in range(full):
            tv[mask] = travel[mask]
        for d in range(nd):
            dur[d] = durations[d]
            cst[d] = costs[d]
        for mask in range(full * nd):
            rc[mask] = inf
        for mask in range(1, full):
            trav = tv[mask]
            for d in range(nd):
                slack = dur[d] - trav
                if slack < theta:
                    continue
                budget = slack // theta
                for g in range(max_group):
                    used[g] = 0
                gain = 0.0
                taken = 0
                for it in range(n_items):
                    if budget <= 0:
                        break
                    if not ((mask >> site[it]) & 1):
                        continue
                    g = grp[it]
                    if g >= 0:
                        if used[g]:
                            continue
                        used[g] = 1
                    dual = dv[it]
                    if dual <= 1e-9:
                        break
                    n = cap[it] if cap[it] < budget else budget
                    gain += n * dual
                    budget -= n
                    taken += n
                if taken:
                    rc[mask * nd + d] = cst[d] - gain - const
        return [rc[mask] for mask in range(full * nd)]
    finally:
        free(site); free(grp); free(cap); free(dv); free(used)
        free(tv); free(dur); free(cst); free(rc)


def transport_feasible(caps, demands, allowed):
    cdef int nw = len(caps)
    cdef int ns = len(demands)
    cdef int i, j, j2, q, head, tail, found, jp
    cdef long long* flow = <long long*> calloc(nw * ns + 1, sizeof(long long))
    cdef long long* left = <long long*> malloc(sizeof(long long) * (nw + 1))
    cdef long long* need = <long long*> malloc(sizeof(long long) * (ns + 1))
    cdef char* allow = <char*> malloc(nw * ns + 1)
    cdef int* parent_w = <int*> malloc(sizeof(int) * (nw + 1))
    cdef int* parent_s = <int*> malloc(sizeof(int) * (ns + 1))
    cdef int* queue = <int*> malloc(sizeof(int) * (nw + 1))
    try:
        for j in range(nw):
            left[j] = caps[j]
            row = allowed[j]
            for i in range(ns):
                allow[j * ns + i] = 1 if row[i] else 0
        for i in range(ns):
            need[i] = demands[i]
        for i in range(ns):
            while need[i] > 0:
                for j in range(nw):
                    parent_w[j] = -2
                for q in range(ns):
                    parent_s[q] = -1
                tail = 0
                for j in range(nw):
                    if allow[j * ns + i]:
                        parent_w[j] = -1
                        queue[tail] = j
                        tail += 1
                found = -1
                head = 0
                while head < tail:
                    j = queue[head]
                    head += 1
                    if left[j] > 0:
                        found = j
                        break
                    for q in range(ns):
                        if flow[j * ns + q] > 0 and parent_s[q] == -1 and q != i:
                            parent_s[q] = j
                            for j2 in range(nw):
                                if parent_w[j2] == -2 and allow[j2 * ns + q]:
                                    parent_w[j2] = q
                                    queue[tail] = j2
                                    tail += 1
                if found < 0:
                    return None
                j = found
                left[j] -= 1
                q = parent_w[j]
                while q != -1:
                    flow[j * ns + q] += 1
                    jp = parent_s[q]
                    flow[jp * ns + q] -= 1
                    j = jp
                    q = parent_w[j]
                flow[j * ns + i] += 1
                need[i] -= 1
        return [[flow[j * ns + i] for i in range(ns)] for j in range(nw)]
    finally:
        free(flow); free(left); free(need); free(allow)
        free(parent_w); free(parent_s); free(queue)
