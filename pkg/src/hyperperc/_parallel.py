import os

import numba
import numpy as np

ENV_THREADS = "HYPERPERC_THREADS"


def resolve_threads(requested=None) -> int:
    """Thread count: ``HYPERPERC_THREADS`` wins over ``requested``; clamped to what numba allows."""
    env = os.environ.get(ENV_THREADS)
    if env:
        requested = int(env)
    if requested is None:
        requested = numba.get_num_threads()
    return max(1, min(int(requested), numba.config.NUMBA_NUM_THREADS))


def set_threads(requested=None) -> int:
    k = resolve_threads(requested)
    numba.set_num_threads(k)
    return k


def chunk_bounds(nrep: int) -> np.ndarray:
    """Replicate ranges for the compiled batch loops, one per active thread."""
    k = max(1, min(numba.get_num_threads(), int(nrep)))
    return np.linspace(0, nrep, k + 1).astype(np.int64)
