"""Pure-Python reference versions of the hot kernels.

Each function here has a typed twin in ``_kernels.pyx`` with the same
signature and results; ``netmigrate.kernels`` picks one at import time.
"""

INF = 1 << 60


def subset_path_lengths(T, k):
    """Shortest open simple path through every site of each subset.

    ``T`` is a k x k travel matrix (sequence of sequences of ints). Returns a
    list indexed by bitmask; entry 0 is 0.
    """
    full = 1 << k
    dp = [[INF] * k for _ in range(full)]
    for i in range(k):
        dp[1 << i][i] = 0
    for mask in range(1, full):
        row = dp[mask]
        for last in range(k):
            cur = row[last]
            if cur >= INF:
                continue
            Tl = T[last]
            for nxt in range(k):
                bit = 1 << nxt
                if mask & bit:
                    continue
                cand = cur + Tl[nxt]
                nrow = dp[mask | bit]
                if cand < nrow[nxt]:
                    nrow[nxt] = cand
    out = [0] * full
    for mask in range(1, full):
        out[mask] = min(dp[mask])
    return out


def ordered_path_lengths(T, k):
    """Travel of the path visiting each subset in increasing site order."""
    full = 1 << k
    out = [0] * full
    for mask in range(1, full):
        prev = -1
        total = 0
        for i in range(k):
            if mask >> i & 1:
                if prev >= 0:
                    total += T[prev][i]
                prev = i
        out[mask] = total
    return out


def superset_min(values, k):
    """``out[m] = min(values[v] for v superset of m)``."""
    out = list(values)
    for b in range(k):
        bit = 1 << b
        for mask in range(1 << k):
            if not mask & bit:
                alt = out[mask | bit]
                if alt < out[mask]:
                    out[mask] = alt
    return out


def greedy_sweep(travel, k, item_site, item_dual, item_cap, item_group,
                 durations, costs, theta, const):
    """Best greedy reduced cost for every (site subset, duration).

    Items must be sorted by decreasing dual. An item is usable when its
    site is in the subset; among items sharing a nonnegative group id only
    the first usable one counts (one orientation per circuit pair). Returns
    a flat list ``rc[mask * len(durations) + d]``; masks or durations that
    admit no endpoint get ``inf``.
    """
    nd = len(durations)
    full = 1 << k
    n_items = len(item_site)
    inf = float("inf")
    rc = [inf] * (full * nd)
    max_group = max(item_group) + 1 if n_items else 0
    for mask in range(1, full):
        trav = travel[mask]
        for d in range(nd):
            slack = durations[d] - trav
            if slack < theta:
                continue
            budget = slack // theta
            used = [False] * max_group
            gain = 0.0
            taken = 0
            for it in range(n_items):
                if budget <= 0:
                    break
                if not mask >> item_site[it] & 1:
                    continue
                g = item_group[it]
                if g >= 0:
                    if used[g]:
                        continue
                    used[g] = True
                dual = item_dual[it]
                if dual <= 1e-9:
                    break
                n = item_cap[it] if item_cap[it] < budget else budget
                gain += n * dual
                budget -= n
                taken += n
            if taken:
                rc[mask * nd + d] = costs[d] - gain - const
    return rc


def transport_feasible(caps, demands, allowed):
    """Integral transportation feasibility by augmenting paths.

    ``caps[j]`` is the endpoint capacity of worker ``j``; ``demands[i]`` the
    endpoints required on side ``i``; ``allowed[j][i]`` whether ``j`` may
    serve ``i``. Returns the allocation matrix when every demand can be met
    exactly, else ``None``.
    """
    nw = len(caps)
    ns = len(demands)
    flow = [[0] * ns for _ in range(nw)]
    left = list(caps)
    need = list(demands)
    for i in range(ns):
        while need[i] > 0:
            # BFS over workers: reach side i from a worker with spare capacity
            # through alternating (side -> worker via positive flow) moves.
            parent_w = [-2] * nw
            parent_s = [-1] * ns
            queue = []
            for j in range(nw):
                if allowed[j][i]:
                    parent_w[j] = -1
                    queue.append(j)
            found = -1
            head = 0
            while head < len(queue):
                j = queue[head]
                head += 1
                if left[j] > 0:
                    found = j
                    break
                # worker j is saturated: free capacity by moving one of its
                # endpoints from side q to another worker
                for q in range(ns):
                    if flow[j][q] > 0 and parent_s[q] == -1 and q != i:
                        parent_s[q] = j
                        for j2 in range(nw):
                            if parent_w[j2] == -2 and allowed[j2][q]:
                                parent_w[j2] = q
                                queue.append(j2)
            if found < 0:
                return None
            # augment one unit along the path
            j = found
            left[j] -= 1
            q = parent_w[j]
            while q != -1:
                flow[j][q] += 1
                j_prev = parent_s[q]
                flow[j_prev][q] -= 1
                j = j_prev
                q = parent_w[j]
            flow[j][i] += 1
            need[i] -= 1
    return flow
