"""Compiled cluster kernels.

All kernels take the graph as ``(d, n, pw)`` with ``pw[i] = n**i`` and query
edge status lazily through the keyed hash, so no configuration is stored.
Replicate loops are split into chunks run under ``prange``; every replicate
writes only its own output slot and integer tallies are merged after the
loop, so results do not depend on the number of threads.
"""
from __future__ import annotations

import numpy as np
from numba import njit, prange

from ._prf import prf, replicate_key

OK = 0
OVERFLOW = 1


@njit(cache=True, inline="always")
def _edge_id(r, j, a, b, n, pj, nbase, npair):
    lo = a if a < b else b
    hi = b if a < b else a
    base = r % pj + (r // (pj * n)) * pj
    pair = lo * (2 * n - lo - 1) // 2 + (hi - lo - 1)
    return (j * nbase + base) * npair + pair


@njit(cache=True, inline="always")
def _is_open(key, eid, thr, full, closed_edge):
    if eid == closed_edge:
        return False
    if full:
        return True
    return prf(key, eid) < thr


@njit(cache=True)
def edge_open_many(d, n, key, thr, full, eids):
    out = np.empty(eids.shape[0], dtype=np.bool_)
    for i in range(eids.shape[0]):
        out[i] = _is_open(key, eids[i], thr, full, -1)
    return out


@njit(cache=True)
def grow(d, n, pw, key, thr, full, src, closed_edge, cap, mark, stamp, queue):
    """Breadth-first growth of the open cluster of ``src``.

    Visited vertices get ``mark[v] = stamp``; the cluster is left in
    ``queue[:size]`` in discovery order.  Returns ``(size, open_incidences,
    status)``; every internal open edge is counted once from each end.
    """
    nbase = pw[d - 1]
    npair = n * (n - 1) // 2
    mark[src] = stamp
    queue[0] = src
    size = 1
    head = 0
    inc = 0
    while head < size:
        r = queue[head]
        head += 1
        for j in range(d):
            pj = pw[j]
            a = (r // pj) % n
            for b in range(n):
                if b == a:
                    continue
                eid = _edge_id(r, j, a, b, n, pj, nbase, npair)
                if not _is_open(key, eid, thr, full, closed_edge):
                    continue
                inc += 1
                w = r + (b - a) * pj
                if mark[w] != stamp:
                    if size >= cap:
                        return size, inc, OVERFLOW
                    mark[w] = stamp
                    queue[size] = w
                    size += 1
    return size, inc, OK


@njit(cache=True)
def grow_distances(d, n, pw, key, thr, full, src, cap, mark, stamp, queue, dist):
    """Like ``grow`` but also records open-subgraph graph distance."""
    nbase = pw[d - 1]
    npair = n * (n - 1) // 2
    mark[src] = stamp
    queue[0] = src
    dist[src] = 0
    size = 1
    head = 0
    while head < size:
        r = queue[head]
        head += 1
        for j in range(d):
            pj = pw[j]
            a = (r // pj) % n
            for b in range(n):
                if b == a:
                    continue
                w = r + (b - a) * pj
                if mark[w] == stamp:
                    continue
                eid = _edge_id(r, j, a, b, n, pj, nbase, npair)
                if not _is_open(key, eid, thr, full, -1):
                    continue
                if size >= cap:
                    return size, OVERFLOW
                mark[w] = stamp
                dist[w] = dist[r] + 1
                queue[size] = w
                size += 1
    return size, OK


@njit(cache=True)
def cluster_edges(d, n, pw, key, thr, full, size, closed_edge, mark, stamp, queue, local):
    """Open edges inside a grown cluster as local-index pairs (i < j)."""
    nbase = pw[d - 1]
    npair = n * (n - 1) // 2
    for i in range(size):
        local[queue[i]] = i
    cap_e = 16
    eu = np.empty(cap_e, dtype=np.int64)
    ev = np.empty(cap_e, dtype=np.int64)
    ne = 0
    for i in range(size):
        r = queue[i]
        for j in range(d):
            pj = pw[j]
            a = (r // pj) % n
            for b in range(n):
                if b == a:
                    continue
                w = r + (b - a) * pj
                if mark[w] != stamp or local[w] <= i:
                    continue
                eid = _edge_id(r, j, a, b, n, pj, nbase, npair)
                if not _is_open(key, eid, thr, full, closed_edge):
                    continue
                if ne == cap_e:
                    cap_e *= 2
                    eu2 = np.empty(cap_e, dtype=np.int64)
                    ev2 = np.empty(cap_e, dtype=np.int64)
                    eu2[:ne] = eu[:ne]
                    ev2[:ne] = ev[:ne]
                    eu = eu2
                    ev = ev2
                eu[ne] = i
                ev[ne] = local[w]
                ne += 1
    return eu[:ne], ev[:ne]


@njit(cache=True)
def bridges(nv, eu, ev):
    """Bridge flags for a connected simple graph on ``nv`` local vertices.

    Iterative lowlink search rooted at local vertex 0.
    """
    ne = eu.shape[0]
    deg = np.zeros(nv + 1, dtype=np.int64)
    for e in range(ne):
        deg[eu[e] + 1] += 1
        deg[ev[e] + 1] += 1
    start = np.cumsum(deg)
    fill = start[:-1].copy()
    adj = np.empty(2 * ne, dtype=np.int64)
    adj_e = np.empty(2 * ne, dtype=np.int64)
    for e in range(ne):
        u, v = eu[e], ev[e]
        adj[fill[u]] = v
        adj_e[fill[u]] = e
        fill[u] += 1
        adj[fill[v]] = u
        adj_e[fill[v]] = e
        fill[v] += 1

    is_bridge = np.zeros(ne, dtype=np.bool_)
    disc = np.full(nv, -1, dtype=np.int64)
    low = np.zeros(nv, dtype=np.int64)
    pedge = np.full(nv, -1, dtype=np.int64)
    it = start[:-1].copy()
    stack = np.empty(nv, dtype=np.int64)
    t = 0
    for root in range(nv):
        if disc[root] != -1:
            continue
        top = 0
        stack[0] = root
        disc[root] = t
        low[root] = t
        t += 1
        while top >= 0:
            v = stack[top]
            if it[v] < start[v + 1]:
                k = it[v]
                it[v] += 1
                w = adj[k]
                e = adj_e[k]
                if e == pedge[v]:
                    continue
                if disc[w] == -1:
                    disc[w] = t
                    low[w] = t
                    t += 1
                    pedge[w] = e
                    top += 1
                    stack[top] = w
                elif disc[w] < low[v]:
                    low[v] = disc[w]
            else:
                top -= 1
                if top >= 0:
                    u = stack[top]
                    if low[v] < low[u]:
                        low[u] = low[v]
                    if low[v] > disc[u]:
                        is_bridge[pedge[v]] = True
    return is_bridge


@njit(cache=True)
def two_edge_component(nv, eu, ev, is_bridge, root):
    """Local vertices reachable from ``root`` without crossing a bridge."""
    ne = eu.shape[0]
    deg = np.zeros(nv + 1, dtype=np.int64)
    for e in range(ne):
        if not is_bridge[e]:
            deg[eu[e] + 1] += 1
            deg[ev[e] + 1] += 1
    start = np.cumsum(deg)
    fill = start[:-1].copy()
    adj = np.empty(start[nv], dtype=np.int64)
    for e in range(ne):
        if not is_bridge[e]:
            u, v = eu[e], ev[e]
            adj[fill[u]] = v
            fill[u] += 1
            adj[fill[v]] = u
            fill[v] += 1
    seen = np.zeros(nv, dtype=np.bool_)
    out = np.empty(nv, dtype=np.int64)
    seen[root] = True
    out[0] = root
    size = 1
    head = 0
    while head < size:
        v = out[head]
        head += 1
        for k in range(start[v], start[v + 1]):
            w = adj[k]
            if not seen[w]:
                seen[w] = True
                out[size] = w
                size += 1
    return out[:size]


@njit(cache=True, parallel=True)
def batch_sizes(d, n, pw, V, seed, rep0, nrep, thr, full, src, cap, bounds, closed_edge):
    """Per-replicate cluster size and open-edge count of ``src``."""
    sizes = np.zeros(nrep, dtype=np.int64)
    edges = np.zeros(nrep, dtype=np.int64)
    status = np.zeros(nrep, dtype=np.int64)
    qlen = min(V, cap) + 1
    for c in prange(bounds.shape[0] - 1):
        mark = np.zeros(V, dtype=np.int32)
        queue = np.empty(qlen, dtype=np.int64)
        stamp = 0
        for i in range(bounds[c], bounds[c + 1]):
            stamp += 1
            key = replicate_key(seed, rep0 + i)
            s, inc, st = grow(d, n, pw, key, thr, full, src, closed_edge, cap, mark, stamp, queue)
            sizes[i] = s
            edges[i] = inc // 2
            status[i] = st
    return sizes, edges, status


@njit(cache=True, parallel=True)
def batch_field(d, n, pw, V, seed, rep0, nrep, thr, full, src, cap, bounds, closed_edge):
    """Tally of replicates in which each vertex lies in the cluster of ``src``."""
    nchunk = bounds.shape[0] - 1
    tallies = np.zeros((nchunk, V), dtype=np.int64)
    sizes = np.zeros(nrep, dtype=np.int64)
    status = np.zeros(nrep, dtype=np.int64)
    qlen = min(V, cap) + 1
    for c in prange(nchunk):
        mark = np.zeros(V, dtype=np.int32)
        queue = np.empty(qlen, dtype=np.int64)
        stamp = 0
        for i in range(bounds[c], bounds[c + 1]):
            stamp += 1
            key = replicate_key(seed, rep0 + i)
            s, inc, st = grow(d, n, pw, key, thr, full, src, closed_edge, cap, mark, stamp, queue)
            sizes[i] = s
            status[i] = st
            for k in range(s):
                tallies[c, queue[k]] += 1
    return tallies.sum(axis=0), sizes, status


@njit(cache=True, parallel=True)
def batch_overlap(d, n, pw, V, seed_a, seed_b, rep0, nrep, thr, full, src_a, src_b,
                  closed_a, cap, bounds):
    """|C_a(src_a) ∩ C_b(src_b)| for two independent configurations per replicate.

    Configuration ``a`` uses ``seed_a`` with edge ``closed_a`` forced closed.
    """
    out = np.zeros(nrep, dtype=np.int64)
    status = np.zeros(nrep, dtype=np.int64)
    qlen = min(V, cap) + 1
    for c in prange(bounds.shape[0] - 1):
        mark_a = np.zeros(V, dtype=np.int32)
        mark_b = np.zeros(V, dtype=np.int32)
        qa = np.empty(qlen, dtype=np.int64)
        qb = np.empty(qlen, dtype=np.int64)
        stamp = 0
        for i in range(bounds[c], bounds[c + 1]):
            stamp += 1
            ka = replicate_key(seed_a, rep0 + i)
            kb = replicate_key(seed_b, rep0 + i)
            sa, _, sta = grow(d, n, pw, ka, thr, full, src_a, closed_a, cap, mark_a, stamp, qa)
            sb, _, stb = grow(d, n, pw, kb, thr, full, src_b, -1, cap, mark_b, stamp, qb)
            status[i] = max(sta, stb)
            cnt = 0
            for k in range(sb):
                if mark_a[qb[k]] == stamp:
                    cnt += 1
            out[i] = cnt
    return out, status


@njit(cache=True, parallel=True)
def batch_doubly(d, n, pw, V, seed, rep0, nrep, thr, full, src, cap, bounds):
    """Per replicate: cluster size and size of the bridge-free component of ``src``."""
    sizes = np.zeros(nrep, dtype=np.int64)
    dbl = np.zeros(nrep, dtype=np.int64)
    status = np.zeros(nrep, dtype=np.int64)
    qlen = min(V, cap) + 1
    for c in prange(bounds.shape[0] - 1):
        mark = np.zeros(V, dtype=np.int32)
        local = np.zeros(V, dtype=np.int64)
        queue = np.empty(qlen, dtype=np.int64)
        stamp = 0
        for i in range(bounds[c], bounds[c + 1]):
            stamp += 1
            key = replicate_key(seed, rep0 + i)
            s, inc, st = grow(d, n, pw, key, thr, full, src, -1, cap, mark, stamp, queue)
            sizes[i] = s
            status[i] = st
            if st != OK or s == 1:
                dbl[i] = 1
                continue
            eu, ev = cluster_edges(d, n, pw, key, thr, full, s, -1, mark, stamp, queue, local)
            isb = bridges(s, eu, ev)
            dbl[i] = two_edge_component(s, eu, ev, isb, 0).shape[0]
    return sizes, dbl, status


@njit(cache=True, parallel=True)
def batch_far(d, n, pw, V, seed, rep0, nrep, thr, full, src, r, cap, bounds):
    """Tally of replicates in which each vertex sits at open distance > r from ``src``."""
    nchunk = bounds.shape[0] - 1
    tallies = np.zeros((nchunk, V), dtype=np.int64)
    sizes = np.zeros(nrep, dtype=np.int64)
    status = np.zeros(nrep, dtype=np.int64)
    qlen = min(V, cap) + 1
    for c in prange(nchunk):
        mark = np.zeros(V, dtype=np.int32)
        dist = np.zeros(V, dtype=np.int64)
        queue = np.empty(qlen, dtype=np.int64)
        stamp = 0
        for i in range(bounds[c], bounds[c + 1]):
            stamp += 1
            key = replicate_key(seed, rep0 + i)
            s, st = grow_distances(d, n, pw, key, thr, full, src, cap, mark, stamp, queue, dist)
            sizes[i] = s
            status[i] = st
            for k in range(s):
                if dist[queue[k]] > r:
                    tallies[c, queue[k]] += 1
    return tallies.sum(axis=0), sizes, status


@njit(cache=True, inline="always")
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit(cache=True)
def union_find_config(d, n, pw, V, key, thr, full, parent, open_count):
    """Union-find over every open edge; roots are the minimum rank of each cluster.

    ``open_count[root]`` receives the number of open edges of that cluster.
    """
    nbase = pw[d - 1]
    npair = n * (n - 1) // 2
    for v in range(V):
        parent[v] = v
        open_count[v] = 0
    for r in range(V):
        for j in range(d):
            pj = pw[j]
            a = (r // pj) % n
            for b in range(a + 1, n):
                eid = _edge_id(r, j, a, b, n, pj, nbase, npair)
                if not _is_open(key, eid, thr, full, -1):
                    continue
                w = r + (b - a) * pj
                x = _find(parent, r)
                y = _find(parent, w)
                if x != y:
                    if x < y:
                        parent[y] = x
                        open_count[x] += open_count[y] + 1
                    else:
                        parent[x] = y
                        open_count[y] += open_count[x] + 1
                else:
                    open_count[x] += 1
    for v in range(V):
        _find(parent, v)


@njit(cache=True, parallel=True)
def batch_largest(d, n, pw, V, seed, rep0, nrep, thr, full, bounds):
    """Per replicate: largest cluster size and its minimum rank."""
    best = np.zeros(nrep, dtype=np.int64)
    where = np.zeros(nrep, dtype=np.int64)
    for c in prange(bounds.shape[0] - 1):
        parent = np.empty(V, dtype=np.int64)
        oc = np.empty(V, dtype=np.int64)
        size = np.zeros(V, dtype=np.int64)
        for i in range(bounds[c], bounds[c + 1]):
            key = replicate_key(seed, rep0 + i)
            union_find_config(d, n, pw, V, key, thr, full, parent, oc)
            size[:] = 0
            for v in range(V):
                size[parent[v]] += 1
            bi = 0
            for v in range(V):
                if size[v] > size[bi]:
                    bi = v
            best[i] = size[bi]
            where[i] = bi
    return best, where
