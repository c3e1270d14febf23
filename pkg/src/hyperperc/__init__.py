"""Bond percolation on Hamming graphs H(d, n) and the Erdős–Rényi random graph."""
import os

# the bundled TBB is too old for numba; pick OpenMP before numba loads
os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")

__version__ = "0.1.0"
