"""Network simplex for the dense transportation problem.

Solves  min sum_ij f_ij C_ij  s.t.  sum_j f_ij = a_i,  sum_i f_ij = b_j,
f >= 0, for strictly positive supplies/demands with equal totals. The basis
is a spanning tree over the n + m bipartite nodes, stored through parent
pointers; node potentials and depths are recomputed from scratch after every
pivot (O(n + m), which keeps the tree logic simple and hard to get wrong).
Entering arcs are found by block pricing with a rolling start offset, taking
the most negative reduced cost inside the first block that contains one.

Everything below is numba-compiled; the public wrapper lives in
``transport.py``.
"""

from __future__ import annotations

import numpy as np
from numba import njit

__all__ = ["solve_transport"]


@njit(cache=True)
def _rebuild_potentials(parent, arc_cost, pot, depth, child_head, child_next, stack):
    """Recompute duals and depths by traversing the tree from the root."""
    V = parent.shape[0]
    for v in range(V):
        child_head[v] = -1
    for v in range(V):
        p = parent[v]
        if p >= 0:
            child_next[v] = child_head[p]
            child_head[p] = v
    pot[0] = 0.0
    depth[0] = 0
    top = 0
    stack[top] = 0
    top += 1
    while top > 0:
        top -= 1
        v = stack[top]
        c = child_head[v]
        while c >= 0:
            pot[c] = arc_cost[c] - pot[v]
            depth[c] = depth[v] + 1
            stack[top] = c
            top += 1
            c = child_next[c]


@njit(cache=True)
def solve_transport(a, b, C, max_pivot_factor=60):
    """Exact optimal transport plan between histograms `a` and `b`.

    Returns (src, tgt, flow, cost, status): status 0 on optimality, 1 if the
    pivot cap was hit (should not happen on well-scaled inputs).
    """
    n = a.shape[0]
    m = b.shape[0]
    V = n + m

    parent = np.full(V, -1, dtype=np.int64)
    flow = np.zeros(V, dtype=np.float64)       # flow on arc (v, parent[v])
    arc_cost = np.zeros(V, dtype=np.float64)   # cost of arc (v, parent[v])
    pot = np.zeros(V, dtype=np.float64)
    depth = np.zeros(V, dtype=np.int64)
    child_head = np.full(V, -1, dtype=np.int64)
    child_next = np.full(V, -1, dtype=np.int64)
    stack = np.empty(V, dtype=np.int64)
    in_tree = np.zeros(V, dtype=np.bool_)

    # --- northwest-corner initial basis (a staircase, hence a tree) -------
    i = 0
    j = 0
    ra = a[0]
    rb = b[0]
    in_tree[0] = True
    while True:
        f = min(ra, rb)
        if f < 0.0:
            f = 0.0
        snode = i
        tnode = n + j
        if not in_tree[tnode]:
            parent[tnode] = snode
            flow[tnode] = f
            arc_cost[tnode] = C[i, j]
            in_tree[tnode] = True
        else:
            parent[snode] = tnode
            flow[snode] = f
            arc_cost[snode] = C[i, j]
            in_tree[snode] = True
        if i == n - 1 and j == m - 1:
            break
        if (ra <= rb and i < n - 1) or j == m - 1:
            rb -= ra
            i += 1
            ra = a[i]
        else:
            ra -= rb
            j += 1
            rb = b[j]

    _rebuild_potentials(parent, arc_cost, pot, depth, child_head, child_next, stack)

    # --- pricing setup -----------------------------------------------------
    nm = n * m
    cmax = 0.0
    for ii in range(n):
        for jj in range(m):
            cij = abs(C[ii, jj])
            if cij > cmax:
                cmax = cij
    tol = 1e-12 * (1.0 + cmax)
    block = int(np.sqrt(nm)) + 1
    if block < 64:
        block = 64

    path_nodes = np.empty(V, dtype=np.int64)
    path_flows = np.empty(V, dtype=np.float64)
    path_costs = np.empty(V, dtype=np.float64)

    search_start = 0
    max_pivots = max_pivot_factor * V + 1000
    status = 0
    pivots = 0
    while True:
        # entering arc: block search, most negative reduced cost in the
        # first block that has one
        best_e = -1
        best_r = -tol
        e = search_start
        scanned = 0
        while scanned < nm:
            blk_end = scanned + block
            if blk_end > nm:
                blk_end = nm
            while scanned < blk_end:
                ei = e // m
                ej = e - ei * m
                r = C[ei, ej] - pot[ei] - pot[n + ej]
                if r < best_r:
                    best_r = r
                    best_e = e
                e += 1
                if e == nm:
                    e = 0
                scanned += 1
            if best_e >= 0:
                break
        search_start = e
        if best_e < 0:
            break  # optimal

        pivots += 1
        if pivots > max_pivots:
            status = 1
            break

        u = best_e // m            # entering source node
        v = n + (best_e - u * m)   # entering sink node
        ecost = C[u, best_e - u * m]

        # --- find theta and the leaving arc along the tree cycle ----------
        # Walking up from either endpoint, arcs at even index from the
        # endpoint lose theta, arcs at odd index gain it.
        theta = np.inf
        leave = -1
        uu = u
        ku = 0
        vv = v
        kv = 0
        while depth[uu] > depth[vv]:
            if ku % 2 == 0 and flow[uu] < theta:
                theta = flow[uu]
                leave = uu
            uu = parent[uu]
            ku += 1
        while depth[vv] > depth[uu]:
            if kv % 2 == 0 and flow[vv] < theta:
                theta = flow[vv]
                leave = vv
            vv = parent[vv]
            kv += 1
        while uu != vv:
            if ku % 2 == 0 and flow[uu] < theta:
                theta = flow[uu]
                leave = uu
            uu = parent[uu]
            ku += 1
            if kv % 2 == 0 and flow[vv] < theta:
                theta = flow[vv]
                leave = vv
            vv = parent[vv]
            kv += 1
        # cycle always contains at least one decreasing arc
        lca = uu

        # --- apply the flow change -----------------------------------------
        uu = u
        ku = 0
        while uu != lca:
            if ku % 2 == 0:
                flow[uu] -= theta
            else:
                flow[uu] += theta
            uu = parent[uu]
            ku += 1
        vv = v
        kv = 0
        while vv != lca:
            if kv % 2 == 0:
                flow[vv] -= theta
            else:
                flow[vv] += theta
            vv = parent[vv]
            kv += 1

        # --- swap entering/leaving arc, re-hanging the cut subtree --------
        # `leave` lies on the path from one entering endpoint up to the LCA;
        # that endpoint's side gets re-rooted at the endpoint.
        side_u = False
        uu = u
        while uu != lca:
            if uu == leave:
                side_u = True
                break
            uu = parent[uu]
        head = u if side_u else v
        # reverse parent pointers from `head` up to `leave`
        k = 0
        node = head
        while True:
            path_nodes[k] = node
            path_flows[k] = flow[node]
            path_costs[k] = arc_cost[node]
            if node == leave:
                break
            node = parent[node]
            k += 1
        for t in range(k, 0, -1):
            nd = path_nodes[t]
            prv = path_nodes[t - 1]
            parent[nd] = prv
            flow[nd] = path_flows[t - 1]
            arc_cost[nd] = path_costs[t - 1]
        parent[head] = v if side_u else u
        flow[head] = theta
        arc_cost[head] = ecost

        _rebuild_potentials(parent, arc_cost, pot, depth, child_head, child_next, stack)

    # --- extract the plan ---------------------------------------------------
    count = 0
    for w in range(V):
        if parent[w] >= 0 and flow[w] > 0.0:
            count += 1
    src = np.empty(count, dtype=np.int64)
    tgt = np.empty(count, dtype=np.int64)
    fl = np.empty(count, dtype=np.float64)
    cost = 0.0
    k = 0
    for w in range(V):
        p = parent[w]
        if p >= 0 and flow[w] > 0.0:
            if w < n:
                src[k] = w
                tgt[k] = p - n
            else:
                src[k] = p
                tgt[k] = w - n
            fl[k] = flow[w]
            cost += flow[w] * C[src[k], tgt[k]]
            k += 1
    return src, tgt, fl, cost, status
