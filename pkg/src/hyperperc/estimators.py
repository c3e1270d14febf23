"""scikit-learn style wrappers over the functional API.

Only the parts of the estimator protocol that fit this domain are provided:
constructor-held hyperparameters with ``get_params``/``set_params``, ``fit``
that stores trailing-underscore attributes, and ``predict`` where a
prediction is meaningful.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils import check_array
from sklearn.utils.validation import check_is_fitted

from .critpoint import solve_pc
from .errg import exact_moments
from .graph import make_graph
from .percolation import DEFAULT_CAP, cluster_sizes


def _p_column(X) -> np.ndarray:
    X = check_array(np.asarray(X, dtype=float).reshape(-1, 1), ensure_min_samples=1)
    p = X[:, 0]
    if np.any((p < 0) | (p > 1)):
        raise ValueError("open probabilities must lie in [0, 1]")
    return p


class SusceptibilityCurve(BaseEstimator):
    """chi(p) on H(d, n) over a grid of p, with coupled replicates across the grid.

    ``fit(X)`` takes the p values as a column (or 1-D array); ``predict``
    interpolates log chi linearly between fitted grid points.
    """

    def __init__(self, d=2, n=10, reps=1000, seed=0, cap=DEFAULT_CAP):
        self.d = d
        self.n = n
        self.reps = reps
        self.seed = seed
        self.cap = cap

    def fit(self, X, y=None):
        p = np.sort(_p_column(X))
        if self.reps < 2:
            raise ValueError("reps must be at least 2")
        g = make_graph(self.d, self.n)
        means, ses = [], []
        for q in p:
            s, _ = cluster_sizes(g, q, self.reps, self.seed, cap=self.cap)
            means.append(s.mean())
            ses.append(s.std(ddof=1) / np.sqrt(self.reps))
        self.p_grid_ = p
        self.chi_ = np.array(means)
        self.chi_se_ = np.array(ses)
        return self

    def predict(self, X):
        check_is_fitted(self, "chi_")
        p = _p_column(X)
        return np.exp(np.interp(p, self.p_grid_, np.log(self.chi_)))


class ERRGMoments(TransformerMixin, BaseEstimator):
    """Exact cluster moments of G(n, p); ``predict`` returns chi for each p in X."""

    def __init__(self, n=100, precision="double"):
        self.n = n
        self.precision = precision

    def fit(self, X=None, y=None):
        exact_moments(self.n, 0.0, self.precision)  # validates n and precision
        self.fitted_ = True
        return self

    def transform(self, X):
        """Columns: chi, second moment, expected edges, expected surplus."""
        check_is_fitted(self, "fitted_")
        rows = []
        for q in _p_column(X):
            mo = exact_moments(self.n, q, self.precision)
            rows.append((mo.chi, mo.second_moment, mo.expected_edges, mo.expected_surplus))
        return np.array(rows)

    def predict(self, X):
        return self.transform(X)[:, 0]


class CriticalPointEstimator(BaseEstimator):
    """Stochastic-bisection estimate of p_c(theta) on H(d, n)."""

    def __init__(self, d=2, n=10, theta=1.0, tol=None, budget=10**7, seed=0, exact=False):
        self.d = d
        self.n = n
        self.theta = theta
        self.tol = tol
        self.budget = budget
        self.seed = seed
        self.exact = exact

    def fit(self, X=None, y=None):
        g = make_graph(self.d, self.n)
        self.result_ = solve_pc(g, self.theta, tol=self.tol, budget=self.budget,
                                seed=self.seed, exact=self.exact)
        self.p_c_ = self.result_.p_hat
        self.bracket_ = (self.result_.p_lo, self.result_.p_hi)
        self.inconclusive_ = self.result_.inconclusive
        return self
