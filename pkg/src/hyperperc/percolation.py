"""Seed-deterministic bond percolation on Hamming graphs and basic Monte Carlo estimators.

Edge states are never stored: each query hashes ``(seed, replicate, edge id)``.
Replicate ``r`` of any estimator sees the same edge uniforms at every ``p``, so
clusters grow monotonically in ``p`` replicate by replicate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from ._parallel import chunk_bounds
from ._prf import key_for, seed_u64, threshold, TAG_AUX
from .graph import HammingGraph, VertexLike, as_rank, edge_id, all_edges, edge_id_raw

DEFAULT_CAP = 10**7


class ClusterOverflowError(RuntimeError):
    """A cluster or configuration exceeded the configured vertex cap."""


@dataclass(frozen=True)
class SampleSpec:
    graph: HammingGraph
    p: float
    master_seed: int
    replicate: int = 0

    def __post_init__(self):
        threshold(self.p)
        if int(self.replicate) != self.replicate or self.replicate < 0:
            raise ValueError(f"replicate must be a non-negative integer, got {self.replicate!r}")

    @property
    def key(self) -> np.uint64:
        return key_for(self.master_seed, self.replicate)

    def with_p(self, p: float) -> "SampleSpec":
        return SampleSpec(self.graph, p, self.master_seed, self.replicate)


@dataclass(frozen=True)
class EstimateWithError:
    mean: float
    standard_error: float
    replicates: int

    @classmethod
    def from_samples(cls, x) -> "EstimateWithError":
        x = np.asarray(x, dtype=np.float64)
        if x.size < 2:
            raise ValueError("at least two replicates are needed for a standard error")
        return cls(float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size)), int(x.size))

    def z_against(self, value: float) -> float:
        """Signed distance from ``value`` in standard errors (0 when both coincide exactly)."""
        diff = self.mean - value
        if self.standard_error == 0.0:
            return 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
        return diff / self.standard_error

    def __iter__(self):
        return iter((self.mean, self.standard_error, self.replicates))


@dataclass(frozen=True)
class ClusterReport:
    source: int
    vertices: frozenset
    open_edges: int
    surplus: int
    bridge_component_of_source: frozenset
    bridges: tuple = ()

    @property
    def size(self) -> int:
        return len(self.vertices)


@dataclass(frozen=True)
class TwoPointField:
    graph: HammingGraph
    values: np.ndarray
    replicates: int

    @property
    def chi(self) -> float:
        return float(self.values.sum())

    def standard_errors(self) -> np.ndarray:
        v = self.values
        return np.sqrt(v * (1.0 - v) / max(self.replicates - 1, 1))


@dataclass(frozen=True)
class ConfigPartition:
    """Clusters of one full configuration; ``labels[v]`` is the minimum rank in v's cluster."""
    labels: np.ndarray
    roots: np.ndarray
    sizes: np.ndarray
    open_edges: np.ndarray

    @property
    def surplus(self) -> np.ndarray:
        return self.open_edges - self.sizes + 1

    @property
    def largest_root(self) -> int:
        # argmax returns the first maximum; roots are ascending
        return int(self.roots[np.argmax(self.sizes)])

    def cluster_of(self, v: int) -> np.ndarray:
        return np.flatnonzero(self.labels == self.labels[v])


def _graph_args(g: HammingGraph):
    return g.d, g.n, g.powers


def _check_reps(reps):
    if int(reps) != reps or reps < 2:
        raise ValueError(f"reps must be an integer >= 2, got {reps!r}")
    return int(reps)


def _raise_overflow(status, cap):
    if np.any(status == K.OVERFLOW):
        raise ClusterOverflowError(
            f"cluster exceeded the cap of {cap} vertices; raise --cap or lower p"
        )


def edge_open(spec: SampleSpec, e: int) -> bool:
    g = spec.graph
    if not 0 <= int(e) < g.n_edges:
        raise ValueError(f"edge id {e} outside [0, {g.n_edges}) for {g}")
    return bool(edge_open_array(spec, np.array([e], dtype=np.int64))[0])


def edge_open_array(spec: SampleSpec, eids) -> np.ndarray:
    thr, full = threshold(spec.p)
    eids = np.ascontiguousarray(eids, dtype=np.int64)
    return K.edge_open_many(spec.graph.d, spec.graph.n, spec.key, thr, full, eids)


def edge_ids_from(g: HammingGraph, v: int, ws: np.ndarray) -> np.ndarray:
    """Edge ids of ``{v, w}`` for an array of neighbors ``ws`` of ``v``."""
    ws = np.asarray(ws, dtype=np.int64)
    diff = np.abs(ws - v)
    j = np.zeros_like(ws)
    for i in range(1, g.d):
        j[diff >= g.n ** i] = i
    pj = g.n ** j
    return edge_id_raw(v, ws, j, g.n, pj, g.n ** (g.d - 1))


def grow_cluster(spec: SampleSpec, source: VertexLike = 0, cap: int = DEFAULT_CAP,
                 closed_edge: int = -1) -> ClusterReport:
    g = spec.graph
    src = as_rank(g, source)
    d, n, pw = _graph_args(g)
    thr, full = threshold(spec.p)
    mark = np.zeros(g.V, dtype=np.int32)
    queue = np.empty(min(g.V, cap) + 1, dtype=np.int64)
    size, inc, status = K.grow(d, n, pw, spec.key, thr, full, src, closed_edge, cap, mark, 1, queue)
    if status == K.OVERFLOW:
        raise ClusterOverflowError(f"cluster of {src} exceeded the cap of {cap} vertices")
    verts = queue[:size].copy()
    local = np.zeros(g.V, dtype=np.int64)
    eu, ev = K.cluster_edges(d, n, pw, spec.key, thr, full, size, closed_edge, mark, 1, queue, local)
    isb = K.bridges(size, eu, ev)
    comp = K.two_edge_component(size, eu, ev, isb, 0)
    bridge_pairs = tuple(
        tuple(sorted((int(verts[eu[k]]), int(verts[ev[k]])))) for k in np.flatnonzero(isb)
    )
    open_edges = inc // 2
    return ClusterReport(
        source=src,
        vertices=frozenset(int(x) for x in verts),
        open_edges=int(open_edges),
        surplus=int(open_edges - size + 1),
        bridge_component_of_source=frozenset(int(verts[i]) for i in comp),
        bridges=tuple(sorted(bridge_pairs)),
    )


def full_config_clusters(spec: SampleSpec, cap: int = DEFAULT_CAP) -> ConfigPartition:
    g = spec.graph
    if g.V > cap:
        raise ClusterOverflowError(f"{g} has {g.V} vertices, above the cap of {cap}")
    d, n, pw = _graph_args(g)
    thr, full = threshold(spec.p)
    parent = np.empty(g.V, dtype=np.int64)
    oc = np.empty(g.V, dtype=np.int64)
    K.union_find_config(d, n, pw, g.V, spec.key, thr, full, parent, oc)
    roots, sizes = np.unique(parent, return_counts=True)
    return ConfigPartition(labels=parent, roots=roots, sizes=sizes, open_edges=oc[roots])


def cluster_sizes(graph: HammingGraph, p: float, reps: int, seed: int, rep0: int = 0,
                  source: int = 0, cap: int = DEFAULT_CAP, closed_edge: int = -1):
    """Per-replicate ``(sizes, open_edge_counts)`` of the cluster of ``source``."""
    d, n, pw = _graph_args(graph)
    thr, full = threshold(p)
    sizes, edges, status = K.batch_sizes(
        d, n, pw, graph.V, seed_u64(seed), rep0, int(reps), thr, full, source, cap,
        chunk_bounds(reps), closed_edge,
    )
    _raise_overflow(status, cap)
    return sizes, edges


def estimate_chi(graph: HammingGraph, p: float, reps: int, seed: int,
                 cap: int = DEFAULT_CAP) -> EstimateWithError:
    reps = _check_reps(reps)
    sizes, _ = cluster_sizes(graph, p, reps, seed, cap=cap)
    return EstimateWithError.from_samples(sizes)


def estimate_two_point_field(graph: HammingGraph, p: float, reps: int, seed: int,
                             cap: int = DEFAULT_CAP, closed_edge: int = -1,
                             source: int = 0) -> TwoPointField:
    reps = _check_reps(reps)
    if graph.V > cap:
        raise ClusterOverflowError(f"{graph} has {graph.V} vertices, above the cap of {cap}")
    d, n, pw = _graph_args(graph)
    thr, full = threshold(p)
    tally, _, status = K.batch_field(
        d, n, pw, graph.V, seed_u64(seed), 0, reps, thr, full, source, cap,
        chunk_bounds(reps), closed_edge,
    )
    _raise_overflow(status, cap)
    values = tally / reps
    if source:
        # re-index by difference rank x - source
        from .graph import difference_rank
        idx = difference_rank(graph, np.arange(graph.V), source)
        shifted = np.empty_like(values)
        shifted[idx] = values
        values = shifted
    return TwoPointField(graph, values, reps)


def estimate_pi0(graph: HammingGraph, p: float, reps: int, seed: int,
                 cap: int = DEFAULT_CAP) -> EstimateWithError:
    """Expected number of vertices doubly connected to the origin."""
    reps = _check_reps(reps)
    d, n, pw = _graph_args(graph)
    thr, full = threshold(p)
    _, dbl, status = K.batch_doubly(
        d, n, pw, graph.V, seed_u64(seed), 0, reps, thr, full, 0, cap, chunk_bounds(reps)
    )
    _raise_overflow(status, cap)
    return EstimateWithError.from_samples(dbl - 1)


def estimate_largest_cluster(graph: HammingGraph, p: float, reps: int, seed: int,
                             cap: int = DEFAULT_CAP) -> EstimateWithError:
    reps = _check_reps(reps)
    if graph.V > cap:
        raise ClusterOverflowError(f"{graph} has {graph.V} vertices, above the cap of {cap}")
    d, n, pw = _graph_args(graph)
    thr, full = threshold(p)
    best, _ = K.batch_largest(d, n, pw, graph.V, seed_u64(seed), 0, reps, thr, full,
                              chunk_bounds(reps))
    return EstimateWithError.from_samples(best)


def estimate_long_connection(graph: HammingGraph, p: float, r: int, reps: int, seed: int,
                             cap: int = DEFAULT_CAP) -> EstimateWithError:
    """max over y of P(y in C(0) at open-subgraph distance > r).

    Open-subgraph distance exceeding r implies a simple open path longer than
    r, so this is a lower bound for the long-path connection probability.
    """
    reps = _check_reps(reps)
    if r < 0:
        raise ValueError("r must be non-negative")
    if graph.V > cap:
        raise ClusterOverflowError(f"{graph} has {graph.V} vertices, above the cap of {cap}")
    d, n, pw = _graph_args(graph)
    thr, full = threshold(p)
    tally, _, status = K.batch_far(d, n, pw, graph.V, seed_u64(seed), 0, reps, thr, full, 0,
                                   int(min(r, graph.V)), cap, chunk_bounds(reps))
    _raise_overflow(status, cap)
    y = int(np.argmax(tally))
    hits = np.zeros(reps)
    hits[: tally[y]] = 1.0
    return EstimateWithError.from_samples(hits)


def estimate_M(graph: HammingGraph, p: float, reps: int, seed: int,
               cap: int = DEFAULT_CAP) -> EstimateWithError:
    """Main lace-expansion term: p * sum_x sum_{v~0} P(0<->x avoiding {0,v}) P(v<->x).

    Uses one fixed neighbor v* (transitivity) and, per replicate, two
    independent configurations: the cluster of 0 with {0,v*} forced closed and
    the cluster of v*.  Their overlap has mean sum_x P'(0<->x) tau(x - v*).
    """
    reps = _check_reps(reps)
    if graph.V > cap:
        raise ClusterOverflowError(f"{graph} has {graph.V} vertices, above the cap of {cap}")
    d, n, pw = _graph_args(graph)
    thr, full = threshold(p)
    vstar = 1
    e = edge_id(graph, 0, vstar)
    overlap, status = K.batch_overlap(
        d, n, pw, graph.V, seed_u64(seed), seed_u64(seed, TAG_AUX), 0, reps, thr, full,
        0, vstar, e, cap, chunk_bounds(reps),
    )
    _raise_overflow(status, cap)
    return EstimateWithError.from_samples(p * graph.m * overlap)
