"""Brute-force reference computations on tiny instances.

Each function here evaluates a quantity straight from its definition, sharing
no code path with the fast implementation it checks: full V x V or
directed-edge transition matrices, literal nested sums, and exhaustive
enumeration of percolation configurations.
"""
from __future__ import annotations

import itertools

import numpy as np

from .graph import HammingGraph, all_edges, difference_rank, neighbors

# ------------------------------------------------------------- random walks


def full_srw_matrix(g: HammingGraph) -> np.ndarray:
    P = np.zeros((g.V, g.V))
    for v in range(g.V):
        P[v, neighbors(g, v)] = 1.0 / g.m
    return P


def srw_class_distribution(g: HammingGraph, t: int) -> np.ndarray:
    x = np.zeros(g.V)
    x[0] = 1.0
    P = full_srw_matrix(g)
    for _ in range(t):
        x = x @ P
    dist = np.count_nonzero(
        (np.arange(g.V)[:, None] // g.powers[:-1]) % g.n, axis=1)
    return np.bincount(dist, weights=x, minlength=g.d + 1)


def _directed_edges(g: HammingGraph):
    arcs = [(v, int(w)) for v in range(g.V) for w in neighbors(g, v)]
    return arcs, {a: i for i, a in enumerate(arcs)}


def full_nbw_matrix(g: HammingGraph):
    """Transition matrix on arcs (v, w): at w, having arrived from v."""
    arcs, idx = _directed_edges(g)
    P = np.zeros((len(arcs), len(arcs)))
    for i, (v, w) in enumerate(arcs):
        for x in neighbors(g, w):
            if x != v:
                P[i, idx[(w, int(x))]] = 1.0 / (g.m - 1)
    return arcs, P


def nbw_point_matrix(g: HammingGraph, t: int) -> np.ndarray:
    """Array [x, y] of t-step NBW probabilities from x to y (t >= 1)."""
    arcs, P = full_nbw_matrix(g)
    heads = np.array([w for _, w in arcs])
    out = np.zeros((g.V, g.V))
    Pt = np.linalg.matrix_power(P, t - 1)
    for x in range(g.V):
        start = np.zeros(len(arcs))
        for i, (v, w) in enumerate(arcs):
            if v == x:
                start[i] = 1.0 / g.m
        out[x] = np.bincount(heads, weights=start @ Pt, minlength=g.V)
    return out


def nbw_class_distribution(g: HammingGraph, t: int) -> np.ndarray:
    if t == 0:
        e = np.zeros(g.d + 1)
        e[0] = 1.0
        return e
    row = nbw_point_matrix(g, t)[0]
    dist = np.count_nonzero((np.arange(g.V)[:, None] // g.powers[:-1]) % g.n, axis=1)
    return np.bincount(dist, weights=row, minlength=g.d + 1)


def nbw_mixing_time(g: HammingGraph, alpha: float, t_max: int = 10_000) -> int:
    arcs, P = full_nbw_matrix(g)
    heads = np.array([w for _, w in arcs])
    tails = np.array([v for v, _ in arcs])
    # all starting points at once: one row per start x
    X = np.zeros((g.V, len(arcs)))
    X[tails, np.arange(len(arcs))] = 1.0 / g.m
    bound = (1.0 + alpha) / g.V
    for t in range(1, t_max + 1):
        pts = np.zeros((g.V, g.V))
        for y in range(g.V):
            pts[:, y] = X[:, heads == y].sum(axis=1)
        if pts.max() <= bound:
            return t
        X = X @ P
    raise RuntimeError("no mixing within t_max")


# ------------------------------------------------------------- diagrams


def _pair(g: HammingGraph, tau: np.ndarray):
    """Matrix T[a, b] = tau(b - a)."""
    r = np.arange(g.V)
    return tau[difference_rank(g, r[None, :], r[:, None])]


def literal_convolution(g: HammingGraph, f, h) -> np.ndarray:
    r = np.arange(g.V)
    out = np.zeros(g.V)
    for x in range(g.V):
        for y in range(g.V):
            out[x] += f[y] * h[difference_rank(g, x, y)]
    return out


def literal_triangle(g, tau, x, y) -> float:
    T = _pair(g, tau)
    return float(sum(T[x, u] * T[u, v] * T[v, y] for u in range(g.V) for v in range(g.V)))


def literal_polygon(g, tau, p, i, j, v, w) -> float:
    """sum over x_1..x_{i-1} of C_i^{(j)}(v, x_1, ..., x_{i-1}, w)."""
    T = _pair(g, tau)
    starts = [int(s) for s in neighbors(g, v)] if j == 1 else [v]
    weight = p if j == 1 else 1.0
    total = 0.0
    for s in starts:
        for xs in itertools.product(range(g.V), repeat=i - 1):
            chain = (s, *xs, w)
            prod = 1.0
            for a, b in zip(chain, chain[1:]):
                prod *= T[a, b]
            total += weight * prod
    return total


def literal_ladder(g, tau, p) -> float:
    """Quintuple sum of C3(0,u,t,0) C3'(u,y,z,t) C2(y,x,z) with the single-point term removed."""
    T = _pair(g, tau)
    V = g.V
    nb = [neighbors(g, u) for u in range(V)]
    total = 0.0
    for u in range(V):
        for t in range(V):
            c0 = T[0, u] * T[u, t] * T[t, 0]
            if c0 == 0.0:
                continue
            for z in range(V):
                for y in range(V):
                    c1 = p * sum(T[int(s), y] for s in nb[u]) * T[y, z] * T[z, t]
                    for x in range(V):
                        if u == 0 and t == 0 and x == y and y == z:
                            continue
                        total += c0 * c1 * T[y, x] * T[x, z]
    return total


# ------------------------------------------------------------- percolation


def _configs(g: HammingGraph, p: float):
    """All configurations as bit matrices with probability weights."""
    E = all_edges(g)
    ne = len(E)
    if ne > 20:
        raise ValueError("too many edges to enumerate")
    cfg = np.arange(1 << ne, dtype=np.int64)
    bits = ((cfg[:, None] >> np.arange(ne)) & 1).astype(bool)
    k = bits.sum(axis=1)
    w = p**k * (1.0 - p) ** (ne - k)
    return E, bits, w


def _reach(g, E, bits, src):
    """Boolean (configs, V) reachability from ``src`` using open edges in ``bits``."""
    R = np.zeros((bits.shape[0], g.V), dtype=bool)
    R[:, src] = True
    for _ in range(g.V):
        prev = R.copy()
        for e, (a, b) in enumerate(E):
            on = bits[:, e]
            R[:, b] |= on & R[:, a]
            R[:, a] |= on & R[:, b]
        if np.array_equal(prev, R):
            break
    return R


def enumerate_two_point(g: HammingGraph, p: float, src: int = 0) -> np.ndarray:
    E, bits, w = _configs(g, p)
    return w @ _reach(g, E, bits, src)


def enumerate_pi0(g: HammingGraph, p: float) -> float:
    """sum_{x != 0} P(0 and x joined by two edge-disjoint open paths).

    By Menger's theorem this is: connected, and still connected after
    closing any single open edge.
    """
    E, bits, w = _configs(g, p)
    ok = _reach(g, E, bits, 0)
    for e in range(len(E)):
        b2 = bits.copy()
        b2[:, e] = False
        ok &= _reach(g, E, b2, 0)
    ok[:, 0] = False
    return float(w @ ok.sum(axis=1))


def enumerate_M(g: HammingGraph, p: float) -> float:
    """p sum_x sum_{v ~ 0} P(0 <-> x without {0,v}) P(v <-> x)."""
    E, bits, w = _configs(g, p)
    total = 0.0
    for v in neighbors(g, 0):
        v = int(v)
        e = next(i for i, (a, b) in enumerate(E) if {int(a), int(b)} == {0, v})
        b2 = bits.copy()
        b2[:, e] = False
        without = w @ _reach(g, E, b2, 0)
        tau_v = w @ _reach(g, E, bits, v)
        total += float(without @ tau_v)
    return p * total
