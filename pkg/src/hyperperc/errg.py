"""Exact moments of the cluster of a fixed vertex in the Erdős–Rényi graph G(n, p).

Two independent routes are provided.

``precision="double"``
    Dynamic programme over the breadth-first exploration state (dead, active).
    Every term is a non-negative probability, so the float64 result carries no
    cancellation and is accurate to a few ulps even at n ~ 10^3.

``precision="extended"``
    The connectivity inclusion recursion, with the edge-weighted variant
    differentiated symbolically at u = 1, in mpmath arithmetic.  The recursion
    subtracts numbers of size ~1 to leave results as small as 1e-300, so the
    working precision is sized from a lower bound on C_k.

The two routes share no code and serve as oracles for each other; the
exhaustive enumeration in :func:`brute_force_oracle` backs both for n <= 7.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from numba import njit
from scipy.special import gammaln

MAX_K = 5000
BRUTE_MAX_N = 7
PRECISIONS = ("double", "extended")


@dataclass(frozen=True)
class ErrgMoments:
    n: int
    p: float
    pmf: np.ndarray  # pmf[k-1] = P(|C(v)| = k)
    chi: float
    second_moment: float
    expected_edges: float
    expected_surplus: float


def _check(n, p, precision="double"):
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p!r}")
    if precision not in PRECISIONS:
        raise ValueError(f"precision must be one of {PRECISIONS}, got {precision!r}")
    return int(n), p


# ---------------------------------------------------------------- double route

@njit(cache=True)
def _explore_dp(n, p, btab):
    """pmf of |C| and E[surplus] from the (dead, active) exploration chain."""
    pmf = np.zeros(n)
    cur = np.zeros(n + 1)
    cur[1] = 1.0
    esp = 0.0
    for t in range(n):
        nxt = np.zeros(n + 1)
        for s in range(1, n - t + 1):
            w = cur[s]
            if w == 0.0:
                continue
            u = n - t - s
            # surplus edges from the explored vertex to the other actives
            esp += w * p * (s - 1)
            row = btab[u]
            # x = 0 and s = 1 closes the cluster at size t + 1
            if s == 1:
                pmf[t] += w * row[0]
            else:
                nxt[s - 1] += w * row[0]
            for x in range(1, u + 1):
                nxt[s - 1 + x] += w * row[x]
        cur = nxt
    return pmf, esp


def _binom_table(n, p):
    u = np.arange(n + 1)[:, None]
    x = np.arange(n + 1)[None, :]
    ok = x <= u
    if p == 0.0 or p == 1.0:
        return (ok & (x == (u if p == 1.0 else 0))).astype(float)
    # log space: scipy's pmf overflows internally for subnormal p
    k = np.maximum(u - x, 0)
    logc = gammaln(u + 1) - gammaln(x + 1) - gammaln(k + 1)
    expo = np.where(ok, logc + x * math.log(p) + k * math.log1p(-p), -np.inf)
    return np.exp(expo)


def _double_moments(n, p):
    pmf, esp = _explore_dp(n, p, _binom_table(n, p))
    k = np.arange(1, n + 1, dtype=float)
    chi = math.fsum(k * pmf)
    return pmf, chi, math.fsum(k * k * pmf), esp


# -------------------------------------------------------------- extended route

def _digits_needed(n, p):
    """Decimal digits that keep the smallest C_k, k <= n, well resolved."""
    if p <= 0.0 or p >= 1.0 or n <= 2:
        return 30
    q = 1.0 - p
    worst = 0.0
    for k in range(2, n + 1):
        # tree lower bound: C_k >= k^(k-2) p^(k-1) q^(C(k,2) - k + 1)
        lg = (k - 2) * math.log10(k) + (k - 1) * math.log10(p) \
            + (k * (k - 1) // 2 - k + 1) * math.log10(q)
        worst = min(worst, lg)
    # the final weighting q^(k(n-k)) is a product, not a difference
    return int(40 + math.ceil(-worst) + 2 * math.log10(n + 1))


def _recursion(kmax, p, with_edges):
    """Lists C[k] and (optionally) A'[k] for k = 1..kmax as mpf (index 0 unused)."""
    p = mpmath.mpf(p)
    q = 1 - p
    C = [mpmath.mpf(0), mpmath.mpf(1)]
    Ad = [mpmath.mpf(0), mpmath.mpf(0)]
    qpow = {}

    def qp(e):
        v = qpow.get(e)
        if v is None:
            v = qpow[e] = q**e
        return v

    for k in range(2, kmax + 1):
        terms = []
        dterms = []
        binom_c = mpmath.mpf(1)  # C(k-1, j-1) for j = 1
        for j in range(1, k):
            w = binom_c * qp(j * (k - j))
            terms.append(w * C[j])
            if with_edges:
                dterms.append(w * (Ad[j] + C[j] * ((k - j) * (k - j - 1) // 2) * p))
            binom_c = binom_c * (k - j) / j
        # add smallest magnitudes first
        terms.sort(key=abs)
        C.append(1 - mpmath.fsum(terms))
        if with_edges:
            dterms.sort(key=abs)
            Ad.append((k * (k - 1) // 2) * p - mpmath.fsum(dterms))
    return C, Ad


def _extended_moments(n, p):
    with mpmath.workdps(_digits_needed(n, p)):
        C, Ad = _recursion(n, p, True)
        mp_p = mpmath.mpf(p)
        q = 1 - mp_p
        probs, edges = [], []
        for k in range(1, n + 1):
            w = mpmath.binomial(n - 1, k - 1) * q ** (k * (n - k))
            probs.append(w * C[k])
            edges.append(w * Ad[k])
        chi = mpmath.fsum(k * pr for k, pr in zip(range(1, n + 1), probs))
        m2 = mpmath.fsum(k * k * pr for k, pr in zip(range(1, n + 1), probs))
        e_edges = mpmath.fsum(edges)
        esp = e_edges - chi + 1
        pmf = np.array([float(x) for x in probs])
        return pmf, float(chi), float(m2), float(esp)


@lru_cache(maxsize=256)
def _moments_cached(n, p, precision):
    if precision == "double":
        pmf, chi, m2, esp = _double_moments(n, p)
    else:
        pmf, chi, m2, esp = _extended_moments(n, p)
    pmf.setflags(write=False)
    return ErrgMoments(n, p, pmf, chi, m2, chi - 1.0 + esp, esp)


def exact_moments(n: int, p: float, precision: str = "double") -> ErrgMoments:
    n, p = _check(n, p, precision)
    return _moments_cached(n, p, precision)


# ------------------------------------------------------------------ public API

def connected_probability(k: int, p: float, precision: str = "double",
                          max_k: int = MAX_K) -> float:
    """P(G(k, p) is connected) from the inclusion recursion.

    The double route sums the recursion with ``math.fsum`` (smallest terms
    first); it loses relative accuracy once C_k drops far below 1, which is
    what the extended route is for.
    """
    k, p = _check(k, p, precision)
    if k > max_k:
        raise ValueError(f"k = {k} exceeds the configured maximum {max_k}")
    if precision == "extended":
        with mpmath.workdps(_digits_needed(k, p)):
            C, _ = _recursion(k, p, False)
            return float(C[k])
    q = 1.0 - p
    C = [0.0, 1.0]
    for kk in range(2, k + 1):
        terms = sorted(
            (math.comb(kk - 1, j - 1) * C[j] * q ** (j * (kk - j)) for j in range(1, kk)),
            key=abs,
        )
        C.append(1.0 - math.fsum(terms))
    return min(1.0, max(0.0, C[k]))


def component_size_pmf(n: int, p: float, precision: str = "double") -> np.ndarray:
    """Array whose entry k-1 is P(|C(v)| = k), k = 1..n."""
    return exact_moments(n, p, precision).pmf.copy()


def exact_susceptibility(n: int, p: float, precision: str = "double") -> float:
    return exact_moments(n, p, precision).chi


def exact_second_moment(n: int, p: float, precision: str = "double") -> float:
    return exact_moments(n, p, precision).second_moment


def exact_expected_edges(n: int, p: float, precision: str = "double") -> float:
    return exact_moments(n, p, precision).expected_edges


def exact_expected_surplus(n: int, p: float, precision: str = "double") -> float:
    return exact_moments(n, p, precision).expected_surplus


# ------------------------------------------------------------ brute force

def brute_force_oracle(n: int, p: float) -> ErrgMoments:
    """Enumerate all 2^C(n,2) graphs on n labelled vertices."""
    n, p = _check(n, p)
    if n > BRUTE_MAX_N:
        raise ValueError(f"brute force is limited to n <= {BRUTE_MAX_N}, got {n}")
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    E = len(pairs)
    pmf = np.zeros(n)
    edges_acc = 0.0
    chunk = 1 << min(E, 16)
    for start in range(0, 1 << E, chunk):
        cfg = np.arange(start, start + chunk, dtype=np.int64)
        bits = (cfg[:, None] >> np.arange(E)) & 1
        nbr = np.zeros((chunk, n), dtype=np.int64)
        for e, (i, j) in enumerate(pairs):
            nbr[:, i] |= bits[:, e] << j
            nbr[:, j] |= bits[:, e] << i
        reach = np.ones(chunk, dtype=np.int64)
        for _ in range(n - 1):
            for i in range(n):
                reach |= np.where((reach >> i) & 1, nbr[:, i], 0)
        inside = (reach[:, None] >> np.arange(n)) & 1
        size = inside.sum(axis=1)
        n_open = bits.sum(axis=1)
        w = p**n_open * (1.0 - p) ** (E - n_open)
        internal = np.zeros(chunk, dtype=np.int64)
        for e, (i, j) in enumerate(pairs):
            internal += bits[:, e] & inside[:, i] & inside[:, j]
        np.add.at(pmf, size - 1, w)
        edges_acc += float(np.dot(w, internal))
    k = np.arange(1, n + 1, dtype=float)
    chi = float(np.dot(k, pmf))
    return ErrgMoments(n, p, pmf, chi, float(np.dot(k * k, pmf)), edges_acc,
                       edges_acc - chi + 1.0)


# ----------------------------------------------------- residual scaling report

@dataclass(frozen=True)
class ResidualRow:
    n: int
    p: float
    chi_exact: float
    chi_formula: float
    surplus_exact: float
    surplus_formula: float
    m2_exact: float
    m2_formula: float

    @property
    def r_chi(self):
        return abs(self.chi_exact - self.chi_formula)

    @property
    def r_surplus(self):
        return abs(self.surplus_exact - self.surplus_formula)

    @property
    def r_m2(self):
        return abs(self.m2_exact - self.m2_formula)

    def as_dict(self) -> dict:
        return {
            "n": self.n, "p": self.p,
            "chi_exact": self.chi_exact, "chi_formula": self.chi_formula,
            "r_chi": self.r_chi, "r_chi_n2": self.r_chi * self.n**2,
            "surplus_exact": self.surplus_exact, "surplus_formula": self.surplus_formula,
            "r_surplus": self.r_surplus, "r_surplus_n2": self.r_surplus * self.n**2,
            "m2_exact": self.m2_exact, "m2_formula": self.m2_formula,
            "r_m2": self.r_m2, "r_m2_n": self.r_m2 * self.n,
        }


@dataclass(frozen=True)
class ResidualReport:
    lam: float
    rows: tuple

    def ratios(self, which: str = "chi") -> list[float]:
        """r(n_{i+1}) / r(n_i) for consecutive entries of the n list."""
        attr = {"chi": "r_chi", "surplus": "r_surplus", "m2": "r_m2"}[which]
        r = [getattr(row, attr) for row in self.rows]
        return [b / a for a, b in zip(r, r[1:])]

    def as_dicts(self) -> list[dict]:
        return [dict(lam=self.lam, **row.as_dict()) for row in self.rows]


def residual_scaling_report(lam: float, n_list, precision: str = "double") -> ResidualReport:
    from .asymptotics import chi_formula, second_moment_formula, surplus_formula

    if not 0.0 < lam < 1.0:
        raise ValueError(f"lambda must lie in (0, 1), got {lam!r}")
    rows = []
    for n in n_list:
        n = int(n)
        if n < 2:
            raise ValueError("n must be at least 2")
        p = lam / (n - 1)
        mo = exact_moments(n, p, precision)
        rows.append(ResidualRow(
            n, p, mo.chi, chi_formula(lam, n), mo.expected_surplus,
            surplus_formula(lam, n), mo.second_moment, second_moment_formula(lam),
        ))
    return ResidualReport(float(lam), tuple(rows))
