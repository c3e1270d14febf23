"""Exploration processes: breadth-first/surplus, branching random walk, line-wise.

Also the Galton-Watson progeny that dominates the line-wise exploration and a
statistical check of the BF/BRW coupling identities.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from . import _kernels as K
from ._parallel import chunk_bounds
from ._prf import TAG_BRW, TAG_GW, prf, prf_uniform, replicate_key, seed_u64, threshold
from .graph import HammingGraph, VertexLike, as_rank, neighbors
from .percolation import (
    DEFAULT_CAP,
    ClusterOverflowError,
    EstimateWithError,
    SampleSpec,
    _check_reps,
    cluster_sizes,
    edge_ids_from,
    edge_open_array,
)

DEFAULT_PROGENY_CAP = 10**7


# ------------------------------------------------------------------ BF

@dataclass(frozen=True)
class BFTrace:
    dead_size_by_step: tuple
    active_size_by_step: tuple
    surplus_edges: frozenset
    T: int
    order: tuple  # vertices in the order they died

    @property
    def dead(self) -> frozenset:
        return frozenset(self.order)


def _open_neighbors(spec: SampleSpec, v: int):
    ws = neighbors(spec.graph, v)
    eids = edge_ids_from(spec.graph, v, ws)
    ok = edge_open_array(spec, eids)
    return ws[ok], eids[ok]


def bf_explore(spec: SampleSpec, v: VertexLike = 0, cap: int = DEFAULT_CAP) -> BFTrace:
    """Breadth-first exploration that records surplus edges.

    Vertices activated in the same step enter the queue in ascending rank.
    """
    g = spec.graph
    v = as_rank(g, v)
    active = deque([v])
    in_active = {v}
    dead = set()
    order = []
    surplus = set()
    dead_sizes, active_sizes = [], []
    while active:
        x = active.popleft()
        in_active.discard(x)
        ws, eids = _open_neighbors(spec, x)
        fresh = []
        for w, e in zip(ws.tolist(), eids.tolist()):
            if w in in_active:
                surplus.add(e)
            elif w not in dead:
                fresh.append(w)
        dead.add(x)
        order.append(x)
        fresh.sort()
        if len(dead) + len(in_active) + len(fresh) > cap:
            raise ClusterOverflowError(f"exploration exceeded the cap of {cap} vertices")
        active.extend(fresh)
        in_active.update(fresh)
        dead_sizes.append(len(dead))
        active_sizes.append(len(in_active))
    return BFTrace(tuple(dead_sizes), tuple(active_sizes), frozenset(surplus), len(order),
                   tuple(order))


# ------------------------------------------------------------------ BRW

@dataclass(frozen=True)
class BRWTrace:
    dead: int
    ghosts_active: int
    ghosts_dead: int
    cumulative_dead_sum: int
    # sum over steps of |phi(D(t-1))| restricted to neighbours of the explored image
    cumulative_dead_adjacent: int


@njit(cache=True)
def _brw_one(d, n, pw, key, thr, full, src, cap, seen, state, stamp, queue, perm):
    m = d * (n - 1)
    ctr = np.uint64(0)
    seen[src] = stamp
    state[src] = 1
    queue[0] = src
    head = 0
    tail = 1
    pa = 0
    pd = 0
    cum = 0
    adj = 0
    while head < tail:
        x = queue[head]
        head += 1
        ndead = head - 1
        cum += ndead
        # dead images adjacent to x
        for j in range(d):
            pj = pw[j]
            a = (x // pj) % n
            for b in range(n):
                if b != a:
                    y = x + (b - a) * pj
                    if seen[y] == stamp and state[y] == 2:
                        adj += 1
        k = 0
        if full:
            k = m
        else:
            for _ in range(m):
                if prf(key, ctr) < thr:
                    k += 1
                ctr += np.uint64(1)
        for i in range(m):
            perm[i] = i
        for i in range(k):
            r = i + int(prf_uniform(key, ctr) * (m - i))
            ctr += np.uint64(1)
            if r >= m:
                r = m - 1
            t = perm[i]
            perm[i] = perm[r]
            perm[r] = t
            idx = perm[i]
            j = idx // (n - 1)
            pj = pw[j]
            a = (x // pj) % n
            b = (a + 1 + idx % (n - 1)) % n
            y = x + (b - a) * pj
            if seen[y] == stamp:
                if state[y] == 1:
                    pa += 1
                else:
                    pd += 1
            else:
                if tail >= cap:
                    return tail, pa, pd, cum, adj, K.OVERFLOW
                seen[y] = stamp
                state[y] = 1
                queue[tail] = y
                tail += 1
        state[x] = 2
    return tail, pa, pd, cum, adj, K.OK


@njit(cache=True, parallel=True)
def _brw_batch(d, n, pw, V, seed, rep0, nrep, thr, full, src, cap, bounds):
    out = np.zeros((nrep, 6), dtype=np.int64)
    m = d * (n - 1)
    qlen = min(V, cap) + 1
    for c in prange(bounds.shape[0] - 1):
        seen = np.zeros(V, dtype=np.int32)
        state = np.zeros(V, dtype=np.int8)
        queue = np.empty(qlen, dtype=np.int64)
        perm = np.empty(m, dtype=np.int64)
        stamp = 0
        for i in range(bounds[c], bounds[c + 1]):
            stamp += 1
            key = replicate_key(seed, rep0 + i)
            r = _brw_one(d, n, pw, key, thr, full, src, cap, seen, state, stamp, queue, perm)
            for q in range(6):
                out[i, q] = r[q]
    return out


def _brw_rows(graph, p, reps, seed, cap, rep0=0):
    d, n, pw = graph.d, graph.n, graph.powers
    thr, full = threshold(p)
    out = _brw_batch(d, n, pw, graph.V, seed_u64(seed, TAG_BRW), rep0, int(reps), thr, full,
                     0, cap, chunk_bounds(reps))
    if np.any(out[:, 5] == K.OVERFLOW):
        raise ClusterOverflowError(f"branching random walk exceeded the cap of {cap} nodes")
    return out


def brw_explore(graph: HammingGraph, p: float, seed: int, replicate: int = 0,
                cap: int = DEFAULT_PROGENY_CAP) -> BRWTrace:
    """One BRW exploration from the origin; ``replicate`` selects the stream."""
    row = _brw_rows(graph, p, 1, seed, cap, rep0=replicate)[0]
    return BRWTrace(int(row[0]), int(row[1]), int(row[2]), int(row[3]), int(row[4]))


def brw_samples(graph: HammingGraph, p: float, reps: int, seed: int,
                cap: int = DEFAULT_PROGENY_CAP) -> dict:
    """Arrays of dead, ghosts_active, ghosts_dead, cumulative sums for many runs."""
    out = _brw_rows(graph, p, reps, seed, cap)
    names = ("dead", "ghosts_active", "ghosts_dead", "cumulative_dead_sum",
             "cumulative_dead_adjacent")
    return {k: out[:, i].copy() for i, k in enumerate(names)}


@dataclass(frozen=True)
class CouplingReport:
    reps: int
    p: float
    brw_dead: EstimateWithError
    cluster_size: EstimateWithError
    brw_ghosts_active: EstimateWithError
    cluster_surplus: EstimateWithError
    ghosts_dead_minus_p_dead_sum: EstimateWithError
    z_size: float
    z_surplus: float
    z_dead: float

    def max_abs_z(self) -> float:
        return max(abs(self.z_size), abs(self.z_surplus), abs(self.z_dead))


def _z_two(a: EstimateWithError, b: EstimateWithError) -> float:
    se = math.hypot(a.standard_error, b.standard_error)
    diff = a.mean - b.mean
    if se == 0.0:
        return 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
    return diff / se


def check_coupling(graph: HammingGraph, p: float, reps: int, seed: int,
                   cap: int = DEFAULT_CAP) -> CouplingReport:
    """Monte Carlo check of the three BF/BRW coupling identities.

    BRW runs and percolation clusters use independent streams.  The dead-ghost
    identity is checked pairwise within BRW runs: E[P^D] = p E[sum_t |D(t-1) adjacent|],
    which on K_n is p E[T(T-1)/2].
    """
    reps = _check_reps(reps)
    b = brw_samples(graph, p, reps, seed, cap)
    sizes, edges = cluster_sizes(graph, p, reps, seed, cap=cap)
    surplus = edges - sizes + 1
    est = EstimateWithError.from_samples
    bd, cs = est(b["dead"]), est(sizes)
    ga, sp = est(b["ghosts_active"]), est(surplus)
    diff = est(b["ghosts_dead"] - p * b["cumulative_dead_adjacent"])
    z_dead = 0.0 if diff.standard_error == 0 else diff.mean / diff.standard_error
    return CouplingReport(reps, float(p), bd, cs, ga, sp, diff,
                          _z_two(bd, cs), _z_two(ga, sp), z_dead)


# ------------------------------------------------------------ line-wise

@dataclass(frozen=True)
class LinewiseTrace:
    dead: frozenset
    parent_edges: frozenset
    T: int


def line_cluster(spec: SampleSpec, v: int, direction: int) -> list:
    """Vertices joined to ``v`` by open edges inside its line in ``direction`` (1-based)."""
    g = spec.graph
    j = direction - 1
    pj = g.n**j
    seen = {v}
    stack = [v]
    while stack:
        x = stack.pop()
        a = (x // pj) % g.n
        ws = np.array([x + (b - a) * pj for b in range(g.n) if b != a], dtype=np.int64)
        ok = edge_open_array(spec, edge_ids_from(g, x, ws))
        for w in ws[ok].tolist():
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return sorted(seen)


def linewise_explore(spec: SampleSpec, v: VertexLike = 0,
                     cap: int = DEFAULT_CAP) -> LinewiseTrace:
    """Line-wise exploration; dead and active vertices are never re-activated."""
    from .graph import edge_id

    g = spec.graph
    v = as_rank(g, v)
    active = deque()
    status = {v: "active"}
    parent_dir = {v: 0}
    parents = set()
    dead = []
    active.append(v)
    while active:
        x = active.popleft()
        status[x] = "dead"
        dead.append(x)
        for i in range(1, g.d + 1):
            if i == parent_dir[x]:
                continue
            for w in line_cluster(spec, x, i):
                if w == x or w in status:
                    continue
                status[w] = "active"
                parent_dir[w] = i
                parents.add(edge_id(g, x, w))
                active.append(w)
                if len(status) > cap:
                    raise ClusterOverflowError(f"exploration exceeded the cap of {cap} vertices")
    return LinewiseTrace(frozenset(dead), frozenset(parents), len(dead))


# ------------------------------------------------------------ GW progeny

@njit(cache=True)
def _gw_one(n, d, pw1, base, thr, full, cap, mark, stamp0, queue):
    """Total progeny; returns (Z, status, stamp)."""
    stamp = stamp0
    ctr = np.uint64(0)
    pending = 1
    z = 0
    root = True
    while pending > 0:
        pending -= 1
        z += 1
        if z > cap:
            return z, K.OVERFLOW, stamp
        lines = d if root else d - 1
        root = False
        for _ in range(lines):
            if stamp >= 2**30:
                mark[:] = 0
                stamp = 0
            stamp += 1
            key = prf(base, ctr)
            ctr += np.uint64(1)
            s, inc, st = K.grow(1, n, pw1, key, thr, full, 0, -1, n, mark, stamp, queue)
            pending += s - 1
    return z, K.OK, stamp


@njit(cache=True, parallel=True)
def _gw_batch(n, d, seed, nrep, thr, full, cap, bounds):
    z = np.zeros(nrep, dtype=np.int64)
    status = np.zeros(nrep, dtype=np.int64)
    pw1 = np.array([1, n], dtype=np.int64)
    for c in prange(bounds.shape[0] - 1):
        mark = np.zeros(n, dtype=np.int32)
        queue = np.empty(n + 1, dtype=np.int64)
        stamp = 0
        for i in range(bounds[c], bounds[c + 1]):
            base = replicate_key(seed, i)
            zi, st, stamp = _gw_one(n, d, pw1, base, thr, full, cap, mark, stamp, queue)
            z[i] = zi
            status[i] = st
    return z, status


def sample_gw_progeny(n: int, p: float, d: int, seed: int, reps: int = 1,
                      cap: int = DEFAULT_PROGENY_CAP) -> np.ndarray:
    """Total progeny of the line-wise Galton-Watson process, ``reps`` samples.

    Root offspring is the sum over d independent G(n, p) cluster sizes minus
    one each; every other node uses d - 1 clusters.
    """
    if d < 1 or n < 2:
        raise ValueError("need d >= 1 and n >= 2")
    thr, full = threshold(p)
    z, status = _gw_batch(int(n), int(d), seed_u64(seed, TAG_GW), int(reps), thr, full,
                          int(cap), chunk_bounds(reps))
    if np.any(status == K.OVERFLOW):
        raise ClusterOverflowError(
            f"Galton-Watson progeny exceeded the cap of {cap}; p is too close to criticality"
        )
    return z


def estimate_gw_progeny(n: int, p: float, d: int, reps: int, seed: int,
                        cap: int = DEFAULT_PROGENY_CAP) -> EstimateWithError:
    reps = _check_reps(reps)
    return EstimateWithError.from_samples(sample_gw_progeny(n, p, d, seed, reps, cap))


__all__ = [
    "BFTrace", "BRWTrace", "LinewiseTrace", "CouplingReport",
    "bf_explore", "brw_explore", "brw_samples", "check_coupling", "line_cluster",
    "linewise_explore", "sample_gw_progeny", "estimate_gw_progeny",
]
