"""Diagrammatic sums built from a two-point field on the torus group Z_n^d.

Fields are length-V arrays indexed by difference rank.  ``P(a <-> b)`` is
read as ``tau(b - a)``, so every diagram below is an exact identity for any
field, symmetric or not.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import HammingGraph, as_rank, neighbor_differences
from .percolation import estimate_M  # noqa: F401  (re-exported)

DIRECT_MAX_V = 4096
LADDER_MAX_V = 4096


@dataclass(frozen=True)
class GroupField:
    graph: HammingGraph
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.graph.V,):
            raise ValueError(f"field has shape {v.shape}, expected ({self.graph.V},)")
        object.__setattr__(self, "values", v)

    def at(self, z) -> float:
        return float(self.values[as_rank(self.graph, z)])


def as_field(x, graph: HammingGraph | None = None) -> GroupField:
    """Accept a GroupField, a TwoPointField, or a raw array together with ``graph``."""
    if isinstance(x, GroupField):
        return x
    if hasattr(x, "graph") and hasattr(x, "values"):
        return GroupField(x.graph, x.values)
    if graph is None:
        raise ValueError("a raw array needs its graph")
    return GroupField(graph, x)


def _grid(f: GroupField) -> np.ndarray:
    g = f.graph
    return f.values.reshape((g.n,) * g.d, order="F")


def _flat(a: np.ndarray) -> np.ndarray:
    return a.reshape(-1, order="F")


def _same_group(f: GroupField, g: GroupField):
    if (f.graph.d, f.graph.n) != (g.graph.d, g.graph.n):
        raise ValueError(f"group mismatch: {f.graph} vs {g.graph}")


def group_convolve(f, g, method: str = "auto") -> GroupField:
    """(f * g)(x) = sum_y f(y) g(x - y) on Z_n^d.

    ``method`` is ``"direct"``, ``"fft"`` or ``"auto"`` (direct when V <= 4096).
    """
    f, g = as_field(f), as_field(g)
    _same_group(f, g)
    G = f.graph
    if method == "auto":
        method = "direct" if G.V <= DIRECT_MAX_V else "fft"
    if method == "fft":
        out = np.fft.ifftn(np.fft.fftn(_grid(f)) * np.fft.fftn(_grid(g))).real
        return GroupField(G, _flat(out))
    if method != "direct":
        raise ValueError(f"unknown convolution method {method!r}")
    gg = _grid(g)
    out = np.zeros_like(gg)
    axes = tuple(range(G.d))
    for y in np.flatnonzero(f.values):
        shift = G.digits(int(y))
        out += f.values[y] * np.roll(gg, shift, axis=axes)
    return GroupField(G, _flat(out))


def delta(graph: HammingGraph) -> GroupField:
    v = np.zeros(graph.V)
    v[0] = 1.0
    return GroupField(graph, v)


def step_distribution(graph: HammingGraph) -> GroupField:
    """Uniform law on the m neighbour differences."""
    v = np.zeros(graph.V)
    v[neighbor_differences(graph)] = 1.0 / graph.m
    return GroupField(graph, v)


def _pick(field: GroupField, z):
    return field if z is None else field.at(z)


def _power(tau: GroupField, i: int, method="auto") -> GroupField:
    out = tau
    for _ in range(i - 1):
        out = group_convolve(out, tau, method)
    return out


def triangle_diagram(tau, z=None, method: str = "auto"):
    """Triangle (tau * tau * tau), as a field or at difference ``z``."""
    tau = as_field(tau)
    return _pick(_power(tau, 3, method), z)


def triangle_at_zero_report(tau, chi_hat: float, V: int | None = None) -> dict:
    tau = as_field(tau)
    V = tau.graph.V if V is None else V
    nabla0 = triangle_diagram(tau, 0)
    excess = nabla0 - 1.0 - 10.0 * chi_hat**3 / V
    return {"nabla0": nabla0, "excess": excess, "m_excess": tau.graph.m * excess,
            "chi": chi_hat, "V": V, "m": tau.graph.m}


def _open(field: GroupField, p: float, method="auto") -> GroupField:
    G = field.graph
    out = group_convolve(step_distribution(G), field, method)
    return GroupField(G, p * G.m * out.values)


def open_triangle(tau, p: float, z=None, method: str = "auto"):
    """sum_{x1,x2} of the triangle whose first bond is a p-weighted edge: p m (D * tau^{*3})."""
    tau = as_field(tau)
    return _pick(_open(_power(tau, 3, method), p, method), z)


def polygon_diagram(tau, p: float, i: int, j: int, z=None, method: str = "auto"):
    """i-gon: tau^{*i}, with a leading p-weighted edge when j = 1."""
    if int(i) != i or i < 2:
        raise ValueError(f"polygon order i must be an integer >= 2, got {i!r}")
    if j not in (0, 1):
        raise ValueError(f"j must be 0 or 1, got {j!r}")
    tau = as_field(tau)
    out = _power(tau, int(i), method)
    if j == 1:
        out = _open(out, p, method)
    return _pick(out, z)


@dataclass(frozen=True)
class LadderBound:
    value: float          # bound with the single-point term removed
    excluded_term: float  # the u = t = 0, x = y = z contribution
    crude_bound: float    # nabla(0) * p m * max F, an upper bound on value + excluded_term


def pi1_ladder_bound(tau, p: float, cap: int = LADDER_MAX_V,
                     method: str = "auto") -> LadderBound:
    """Diagrammatic bound on the first lace-expansion coefficient minus its main term M.

    sum_{u,t,z,y,x} C3(0,u,t,0) C3'(u,y,z,t) C2(y,x,z) over all points except
    u = t = 0, x = y = z.  Contracting x then (y, z) then the edge gives
    F = tau * (tau . (tau * tau)) * tau and G = p m (D * F); the sum is
    sum_t (tau * (tau . G))(t) tau(-t).
    """
    tau = as_field(tau)
    G = tau.graph
    if G.V > cap:
        raise ValueError(f"{G} has V = {G.V} above the ladder cap {cap}")
    t = tau.values
    neg = _flat(np.flip(_grid(tau), axis=tuple(range(G.d))))
    neg = np.roll(neg.reshape((G.n,) * G.d, order="F"), 1, axis=tuple(range(G.d)))
    neg = _flat(neg)  # neg[x] = tau(-x)
    bubble = group_convolve(tau, tau, method)
    W = GroupField(G, t * bubble.values)
    F = group_convolve(group_convolve(tau, W, method), tau, method)
    Gf = _open(F, p, method)
    H = GroupField(G, t * Gf.values)
    total = float(np.dot(group_convolve(tau, H, method).values, neg))
    # u = t = 0 and x = y = z: p tau(0)^6 sum_y sum_{s ~ 0} tau(y - s) tau(-y)
    shifted = group_convolve(step_distribution(G), tau, method).values * G.m
    excluded = p * t[0] ** 6 * float(np.dot(shifted, neg))
    nabla0 = triangle_diagram(tau, 0, method)
    crude = nabla0 * p * G.m * float(F.values.max())
    return LadderBound(total - excluded, excluded, crude)
