"""Simple and non-backtracking random walks on H(d, n), lumped by distance class.

The stabiliser of a vertex x (coordinate permutations together with digit
relabellings that fix x) acts transitively on each sphere around x, so the
t-step point probability from x to y depends only on the Hamming distance k.
Hence a walk started at x can be tracked through its distance class alone:
d + 1 states for the simple walk.  The non-backtracking walk also needs the
type of its last move (decrease, lateral, increase), because that type fixes
the type of the one forbidden reverse move.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

DEC, LAT, INC = 0, 1, 2
MOVE_NAMES = ("decreased", "lateral", "increased")


class MixingCapError(RuntimeError):
    """The point-probability threshold was not reached within the iteration cap."""


def _check_dn(d, n):
    if int(d) != d or d < 1 or int(n) != n or n < 2:
        raise ValueError(f"need integers d >= 1 and n >= 2, got d={d!r}, n={n!r}")
    return int(d), int(n)


def class_sizes(d: int, n: int) -> np.ndarray:
    d, n = _check_dn(d, n)
    return np.array([comb(d, k) * (n - 1) ** k for k in range(d + 1)], dtype=float)


# ---------------------------------------------------------------- SRW

@dataclass(frozen=True)
class LumpedSRWChain:
    d: int
    n: int
    matrix: np.ndarray  # row k -> column k'


def srw_chain(d: int, n: int) -> LumpedSRWChain:
    d, n = _check_dn(d, n)
    m = d * (n - 1)
    P = np.zeros((d + 1, d + 1))
    for k in range(d + 1):
        if k > 0:
            P[k, k - 1] = k / m
        P[k, k] = k * (n - 2) / m
        if k < d:
            P[k, k + 1] = (d - k) / d
    return LumpedSRWChain(d, n, P)


def srw_distance_distribution(d: int, n: int, t: int) -> np.ndarray:
    """P(distance = k after t simple-walk steps from the start), k = 0..d."""
    if int(t) != t or t < 0:
        raise ValueError("t must be a non-negative integer")
    P = srw_chain(d, n).matrix
    x = np.zeros(d + 1)
    x[0] = 1.0
    for _ in range(int(t)):
        x = x @ P
    return x


def srw_point_probabilities(d: int, n: int, t: int) -> np.ndarray:
    return srw_distance_distribution(d, n, t) / class_sizes(d, n)


# ---------------------------------------------------------------- NBW

@dataclass(frozen=True)
class LumpedNBWChain:
    d: int
    n: int
    states: tuple  # (k, move type)
    matrix: np.ndarray

    def index(self, k: int, move: int) -> int:
        return self.states.index((k, move))


def _nbw_counts(d, n, k, move):
    return (
        k - (move == INC),
        k * (n - 2) - (move == LAT),
        (d - k) * (n - 1) - (move == DEC),
    )


def nbw_chain(d: int, n: int) -> LumpedNBWChain:
    d, n = _check_dn(d, n)
    m = d * (n - 1)
    if m < 2:
        raise ValueError("the non-backtracking walk needs degree at least 2 (d=1, n=2 is degenerate)")
    states = []
    for k in range(d + 1):
        if k >= 1:
            states.append((k, INC))
            if n >= 3:
                states.append((k, LAT))
        if k <= d - 1:
            states.append((k, DEC))
    states.sort()
    idx = {s: i for i, s in enumerate(states)}
    P = np.zeros((len(states), len(states)))
    for (k, move), i in idx.items():
        dec, lat, inc = _nbw_counts(d, n, k, move)
        if dec > 0:
            P[i, idx[(k - 1, DEC)]] = dec / (m - 1)
        if lat > 0:
            P[i, idx[(k, LAT)]] = lat / (m - 1)
        if inc > 0:
            P[i, idx[(k + 1, INC)]] = inc / (m - 1)
    return LumpedNBWChain(d, n, tuple(states), P)


def nbw_distance_distribution(d: int, n: int, t: int) -> np.ndarray:
    """P(distance = k after t non-backtracking steps), k = 0..d."""
    if int(t) != t or t < 0:
        raise ValueError("t must be a non-negative integer")
    out = np.zeros(d + 1)
    if t == 0:
        out[0] = 1.0
        return out
    ch = nbw_chain(d, n)
    x = np.zeros(len(ch.states))
    x[ch.index(1, INC)] = 1.0
    for _ in range(int(t) - 1):
        x = x @ ch.matrix
    for (k, _), w in zip(ch.states, x):
        out[k] += w
    return out


def nbw_point_probabilities(d: int, n: int, t: int) -> np.ndarray:
    return nbw_distance_distribution(d, n, t) / class_sizes(d, n)


def nbw_point_max(d: int, n: int, t: int) -> float:
    """max_{x,y} of the t-step non-backtracking transition probability."""
    if int(t) != t or t < 1:
        raise ValueError("t must be a positive integer")
    return float(nbw_point_probabilities(d, n, t).max())


def mixing_time(d: int, n: int, alpha: float, t_max: int = 100_000) -> int:
    """Smallest t >= 1 with every t-step NBW point probability <= (1 + alpha)/V."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    ch = nbw_chain(d, n)
    sizes = class_sizes(d, n)
    cls = np.array([k for k, _ in ch.states])
    bound = (1.0 + alpha) / float(n) ** d
    x = np.zeros(len(ch.states))
    x[ch.index(1, INC)] = 1.0
    for t in range(1, t_max + 1):
        pk = np.bincount(cls, weights=x, minlength=d + 1) / sizes
        if pk.max() <= bound:
            return t
        x = x @ ch.matrix
    raise MixingCapError(
        f"NBW point probabilities on H({d},{n}) did not fall below (1+{alpha})/V "
        f"within {t_max} steps"
    )
