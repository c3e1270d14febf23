"""Hamming graph geometry.

Vertices of H(d, n) are carried as integer ranks ``sum(digits[i] * n**i)``;
digit tuples are produced on demand.  Coordinate ``i`` of the public API is
1-based (``line(g, v, 1)`` varies ``digits[0]``).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Sequence, Union

import numpy as np

VertexLike = Union[int, np.integer, Sequence[int]]


@dataclass(frozen=True)
class HammingGraph:
    d: int
    n: int
    m: int = field(init=False)
    V: int = field(init=False)

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"dimension d must be an integer >= 1, got {self.d!r}")
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"side length n must be an integer >= 2, got {self.n!r}")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "m", self.d * (self.n - 1))
        object.__setattr__(self, "V", self.n ** self.d)

    @property
    def n_edges(self) -> int:
        return self.V * self.m // 2

    @property
    def powers(self) -> np.ndarray:
        """``n**i`` for i = 0..d (int64)."""
        return self.n ** np.arange(self.d + 1, dtype=np.int64)

    def sphere_size(self, k: int) -> int:
        """Number of vertices at Hamming distance ``k`` from a fixed vertex."""
        if k < 0 or k > self.d:
            return 0
        return comb(self.d, k) * (self.n - 1) ** k

    def rank(self, v: VertexLike) -> int:
        return as_rank(self, v)

    def digits(self, r: int) -> tuple[int, ...]:
        return unrank(self, r)

    def __str__(self):
        return f"H({self.d},{self.n})"


def make_graph(d: int, n: int) -> HammingGraph:
    return HammingGraph(d, n)


def as_rank(g: HammingGraph, v: VertexLike) -> int:
    """Accept a rank or a digit sequence and return the validated rank."""
    if isinstance(v, (int, np.integer)):
        r = int(v)
        if not 0 <= r < g.V:
            raise ValueError(f"vertex rank {r} outside [0, {g.V}) for {g}")
        return r
    digits = tuple(int(x) for x in v)
    if len(digits) != g.d:
        raise ValueError(f"vertex {digits} has {len(digits)} digits, expected {g.d}")
    r = 0
    for i, x in enumerate(digits):
        if not 0 <= x < g.n:
            raise ValueError(f"digit {x} outside [0, {g.n}) in vertex {digits}")
        r += x * g.n ** i
    return r


def unrank(g: HammingGraph, r: int) -> tuple[int, ...]:
    r = as_rank(g, r)
    out = []
    for _ in range(g.d):
        r, x = divmod(r, g.n)
        out.append(x)
    return tuple(out)


def digits_array(g: HammingGraph, ranks) -> np.ndarray:
    """Digit matrix of shape ``(len(ranks), d)`` for an array of ranks."""
    ranks = np.asarray(ranks, dtype=np.int64)
    return (ranks[..., None] // g.powers[:-1]) % g.n


def ranks_from_digits(g: HammingGraph, digits) -> np.ndarray:
    return np.asarray(digits, dtype=np.int64) @ g.powers[:-1]


def neighbors(g: HammingGraph, v: VertexLike) -> np.ndarray:
    """The m neighbors of ``v``, ordered by direction and then by digit."""
    r = as_rank(g, v)
    out = np.empty(g.m, dtype=np.int64)
    k = 0
    for j in range(g.d):
        pj = g.n ** j
        a = (r // pj) % g.n
        for b in range(g.n):
            if b != a:
                out[k] = r + (b - a) * pj
                k += 1
    return out


def distance(g: HammingGraph, v: VertexLike, w: VertexLike) -> int:
    a = digits_array(g, as_rank(g, v))
    b = digits_array(g, as_rank(g, w))
    return int(np.count_nonzero(a != b))


def line(g: HammingGraph, v: VertexLike, i: int) -> np.ndarray:
    """Ranks of the i-directional line through ``v`` (i is 1-based), ascending."""
    if int(i) != i or not 1 <= i <= g.d:
        raise ValueError(f"direction must be in 1..{g.d}, got {i!r}")
    r = as_rank(g, v)
    pj = g.n ** (i - 1)
    a = (r // pj) % g.n
    return r + (np.arange(g.n, dtype=np.int64) - a) * pj


def edge_direction(g: HammingGraph, v: VertexLike, w: VertexLike) -> int:
    """0-based direction in which adjacent ``v`` and ``w`` differ."""
    diff = np.flatnonzero(digits_array(g, as_rank(g, v)) != digits_array(g, as_rank(g, w)))
    if diff.size != 1:
        raise ValueError(f"vertices {v!r} and {w!r} are not adjacent in {g}")
    return int(diff[0])


def edge_id(g: HammingGraph, v: VertexLike, w: VertexLike) -> int:
    """Canonical id of the edge {v, w}, a bijection onto ``range(V*m//2)``."""
    rv, rw = as_rank(g, v), as_rank(g, w)
    j = edge_direction(g, rv, rw)
    return int(edge_id_raw(rv, rw, j, g.n, g.n ** j, g.n ** (g.d - 1)))


def edge_id_raw(rv, rw, j, n, pj, base_count):
    """Vectorisable edge-id arithmetic shared with the compiled kernels."""
    a = (rv // pj) % n
    b = (rw // pj) % n
    lo = min(a, b) if np.ndim(a) == 0 else np.minimum(a, b)
    hi = max(a, b) if np.ndim(a) == 0 else np.maximum(a, b)
    base = rv % pj + (rv // (pj * n)) * pj
    pair = lo * (2 * n - lo - 1) // 2 + (hi - lo - 1)
    return (j * base_count + base) * (n * (n - 1) // 2) + pair


def all_edges(g: HammingGraph) -> np.ndarray:
    """Every edge as a ``(V*m//2, 2)`` array of rank pairs (v < w)."""
    ranks = np.arange(g.V, dtype=np.int64)
    digs = digits_array(g, ranks)
    chunks = []
    for j in range(g.d):
        pj = g.n ** j
        for delta in range(1, g.n):
            mask = digs[:, j] + delta < g.n
            v = ranks[mask]
            chunks.append(np.stack([v, v + delta * pj], axis=1))
    return np.concatenate(chunks)


def difference_rank(g: HammingGraph, x, y) -> np.ndarray:
    """Rank of the group difference ``x - y`` in Z_n^d (broadcasting)."""
    dx = digits_array(g, x)
    dy = digits_array(g, y)
    return ranks_from_digits(g, (dx - dy) % g.n)


def neighbor_differences(g: HammingGraph) -> np.ndarray:
    """Ranks of the m group elements at Hamming distance 1 from 0."""
    return neighbors(g, 0)
