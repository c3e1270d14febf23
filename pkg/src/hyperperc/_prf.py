"""Counter-based keyed hash used for every random bit in the package.

An edge's uniform is ``prf(replicate_key(seed, rep), edge_id)``; the edge is
open iff that 64-bit value is below ``floor(p * 2**64)``.  Thresholding one
uniform per edge couples all p monotonically.  Auxiliary streams (branching
walks, Galton-Watson sampling) use the same hash with a domain tag folded
into the seed so they never collide with edge draws.
"""
from __future__ import annotations

import numpy as np
from numba import njit

MASK64 = (1 << 64) - 1

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0

# domain tags for auxiliary streams
TAG_BRW = 0x42525721
TAG_GW = 0x4757_5052
TAG_AUX = 0x4155_5831


@njit(cache=True, inline="always")
def mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True, inline="always")
def replicate_key(seed, rep):
    return mix64(seed ^ mix64(np.uint64(rep) * _GOLDEN + _GOLDEN))


@njit(cache=True, inline="always")
def prf(key, counter):
    return mix64(mix64(np.uint64(counter) * _GOLDEN ^ key) + key)


@njit(cache=True, inline="always")
def prf_uniform(key, counter):
    """Float in [0, 1) from the top 53 bits of ``prf``."""
    return float(prf(key, counter) >> _S11) * _INV53


@njit(cache=True)
def _prf_many(key, counters):
    out = np.empty(counters.shape[0], dtype=np.uint64)
    for i in range(counters.shape[0]):
        out[i] = prf(key, counters[i])
    return out


@njit(cache=True)
def _key(seed, rep):
    return replicate_key(seed, rep)


def seed_u64(seed: int, tag: int = 0) -> np.uint64:
    """Reduce an arbitrary Python integer seed (and stream tag) to uint64."""
    s = (int(seed) ^ (int(tag) * 0x9E3779B97F4A7C15)) & MASK64
    return np.uint64(s)


def key_for(seed: int, rep: int, tag: int = 0) -> np.uint64:
    return np.uint64(_key(seed_u64(seed, tag), np.uint64(rep)))


def threshold(p: float) -> tuple[np.uint64, bool]:
    """``(floor(p * 2**64), always_open)`` for an open probability ``p``."""
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"open probability must lie in [0, 1], got {p!r}")
    if p >= 1.0:
        return np.uint64(MASK64), True
    # scaling by a power of two is exact, int() floors a positive float
    return np.uint64(int(p * 2.0**64)), False


def edge_uniforms(seed: int, rep: int, edge_ids) -> np.ndarray:
    """Raw 64-bit draws for an array of edge ids."""
    ids = np.ascontiguousarray(edge_ids, dtype=np.uint64)
    return _prf_many(key_for(seed, rep), ids)
