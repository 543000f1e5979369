"""Numba kernels for bounded Dijkstra queries on CSR graphs and the path-greedy filter."""

from __future__ import annotations

import heapq

import numpy as np
from numba import njit


@njit(cache=True)
def _bounded_sssp(indptr, indices, weights, src, limit, dist, stamp, tick, touched):
    """Dijkstra from ``src`` that never settles vertices farther than ``limit``.

    ``dist`` entries are only meaningful where ``stamp == tick``. Returns the
    number of touched vertices written into ``touched``.
    """
    n_touched = 0
    dist[src] = 0.0
    stamp[src] = tick
    touched[n_touched] = src
    n_touched += 1
    heap = [(0.0, src)]
    while len(heap) > 0:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for k in range(indptr[u], indptr[u + 1]):
            v = indices[k]
            nd = d + weights[k]
            if nd > limit:
                continue
            if stamp[v] != tick:
                stamp[v] = tick
                dist[v] = nd
                if n_touched < touched.shape[0]:
                    touched[n_touched] = v
                    n_touched += 1
                heapq.heappush(heap, (nd, v))
            elif nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return n_touched


@njit(cache=True)
def pair_distances(indptr, indices, weights, n_vertices, src_order, src_start, pair_tgt, pair_limit):
    """Bounded graph distances for pairs grouped by source.

    Pairs ``src_start[g]:src_start[g+1]`` share source ``src_order[g]``. The
    search for a group stops at the largest limit in the group; pairs whose
    target is not reached get ``inf``.
    """
    out = np.full(pair_tgt.shape[0], np.inf)
    dist = np.empty(n_vertices)
    stamp = np.zeros(n_vertices, dtype=np.int64)
    touched = np.empty(n_vertices, dtype=np.int64)
    for g in range(src_order.shape[0]):
        lo = src_start[g]
        hi = src_start[g + 1]
        lim = 0.0
        for k in range(lo, hi):
            if pair_limit[k] > lim:
                lim = pair_limit[k]
        _bounded_sssp(indptr, indices, weights, src_order[g], lim * (1.0 + 1e-12), dist, stamp, g + 1, touched)
        for k in range(lo, hi):
            t = pair_tgt[k]
            if stamp[t] == g + 1:
                out[k] = dist[t]
    return out


@njit(cache=True)
def _dyn_bounded(adj, adjw, deg, src, dst, limit, dist, stamp, tick):
    dist[src] = 0.0
    stamp[src] = tick
    heap = [(0.0, src)]
    while len(heap) > 0:
        d, u = heapq.heappop(heap)
        if u == dst:
            return d
        if d > dist[u]:
            continue
        for k in range(deg[u]):
            v = adj[u, k]
            nd = d + adjw[u, k]
            if nd > limit:
                continue
            if stamp[v] != tick or nd < dist[v]:
                stamp[v] = tick
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return np.inf


@njit(cache=True)
def greedy_filter(n_vertices, cu, cv, cw, t, seed_u, seed_v, seed_w):
    """Path-greedy selection over candidate edges sorted by weight.

    Seed edges are inserted first unconditionally. A candidate (u, v, w) is
    kept iff the current graph distance between u and v exceeds ``t * w``.
    Returns a boolean mask over candidates.
    """
    cap = 8
    adj = np.empty((n_vertices, cap), dtype=np.int64)
    adjw = np.empty((n_vertices, cap))
    deg = np.zeros(n_vertices, dtype=np.int64)
    dist = np.empty(n_vertices)
    stamp = np.zeros(n_vertices, dtype=np.int64)
    keep = np.zeros(cu.shape[0], dtype=np.bool_)
    m = seed_u.shape[0] + cu.shape[0]
    for k in range(m):
        if k < seed_u.shape[0]:
            u = seed_u[k]
            v = seed_v[k]
            w = seed_w[k]
        else:
            j = k - seed_u.shape[0]
            u = cu[j]
            v = cv[j]
            w = cw[j]
            if _dyn_bounded(adj, adjw, deg, u, v, t * w, dist, stamp, k + 1) <= t * w:
                continue
            keep[j] = True
        if deg[u] == cap or deg[v] == cap:
            ncap = cap * 2
            nadj = np.empty((n_vertices, ncap), dtype=np.int64)
            nadjw = np.empty((n_vertices, ncap))
            nadj[:, :cap] = adj
            nadjw[:, :cap] = adjw
            adj = nadj
            adjw = nadjw
            cap = ncap
        adj[u, deg[u]] = v
        adjw[u, deg[u]] = w
        deg[u] += 1
        adj[v, deg[v]] = u
        adjw[v, deg[v]] = w
        deg[v] += 1
    return keep


@njit(cache=True)
def greedy_matrix(n, cu, cv, cw, t):
    """Path-greedy over weight-sorted pairs with an exact all-pairs distance matrix.

    Adding edge (u, v, w) relaxes every entry through it, so each candidate
    test is a single lookup. Memory is O(n^2).
    """
    d = np.full((n, n), np.inf)
    for i in range(n):
        d[i, i] = 0.0
    keep = np.zeros(cu.shape[0], dtype=np.bool_)
    for k in range(cu.shape[0]):
        u = cu[k]
        v = cv[k]
        w = cw[k]
        if d[u, v] <= t * w:
            continue
        keep[k] = True
        du = d[u].copy()
        dv = d[v].copy()
        for i in range(n):
            a = du[i] + w
            b = dv[i] + w
            if a >= d[i, v] and b >= d[i, u]:
                continue
            for j in range(n):
                x = a + dv[j]
                y = b + du[j]
                if y < x:
                    x = y
                if x < d[i, j]:
                    d[i, j] = x
    return keep


@njit(cache=True)
def theta_cone(xs, ys, ang0, ang1):
    """For every point, the point of its cone [ang0, ang1) nearest along the cone bisector.

    Dominance sweep: descending on the first oblique coordinate, a min
    segment tree over ranks of the second. Returns -1 for empty cones.
    """
    n = len(xs)
    a1x, a1y = np.cos(ang0), np.sin(ang0)
    a2x, a2y = np.cos(ang1), np.sin(ang1)
    mid = 0.5 * (ang0 + ang1)
    bx, by = np.cos(mid), np.sin(mid)
    s = a1x * ys - a1y * xs
    r = xs * a2y - ys * a2x
    w = xs * bx + ys * by
    rs = np.sort(r)
    size = 1
    while size < n:
        size *= 2
    tv = np.full(2 * size, np.inf)
    ti = np.full(2 * size, -1, dtype=np.int64)
    order = np.argsort(-s)
    out = np.full(n, -1, dtype=np.int64)
    pos = np.searchsorted(rs, r, side="left")
    # identical r values share a leaf slot; keep the smaller w there
    k = 0
    while k < n:
        e = k
        while e < n and s[order[e]] == s[order[k]]:
            e += 1
        for m in range(k, e):
            q = order[m]
            leaf = pos[q] + size
            if w[q] < tv[leaf]:
                tv[leaf] = w[q]
                ti[leaf] = q
                leaf //= 2
                while leaf >= 1:
                    lc, rc = 2 * leaf, 2 * leaf + 1
                    if tv[lc] <= tv[rc]:
                        tv[leaf], ti[leaf] = tv[lc], ti[lc]
                    else:
                        tv[leaf], ti[leaf] = tv[rc], ti[rc]
                    leaf //= 2
        for m in range(k, e):
            p = order[m]
            lo = np.searchsorted(rs, r[p], side="right") + size
            hi = n - 1 + size + 1
            best, bi = np.inf, -1
            while lo < hi:
                if lo & 1:
                    if tv[lo] < best:
                        best, bi = tv[lo], ti[lo]
                    lo += 1
                if hi & 1:
                    hi -= 1
                    if tv[hi] < best:
                        best, bi = tv[hi], ti[hi]
                lo //= 2
                hi //= 2
            out[p] = bi
        k = e
    return out
