"""Critical-point estimation: stochastic bisection for chi(p) = theta V^(1/3) and friends."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .asymptotics import cube_root, pc_expansion, pl_lower_bound
from .errg import exact_susceptibility
from .graph import HammingGraph, make_graph
from .percolation import (
    DEFAULT_CAP,
    EstimateWithError,
    _check_reps,
    cluster_sizes,
    estimate_two_point_field,
)

DEFAULT_BATCH = 2000
DEFAULT_POINT_CAP = 400_000
Z_DECIDE = 3.0


@dataclass(frozen=True)
class PointDecision:
    p: float
    chi: EstimateWithError
    side: int  # -1 below the target, +1 above, 0 undecided


@dataclass
class PcEstimate:
    theta: float
    target: float
    p_hat: float
    p_lo: float
    p_hi: float
    chi_lo: EstimateWithError
    chi_hi: EstimateWithError
    budget_used: int
    inconclusive: bool
    history: list = field(default_factory=list)

    @property
    def width(self) -> float:
        return self.p_hi - self.p_lo

    def as_dict(self) -> dict:
        return {
            "theta": self.theta, "target": self.target, "p_hat": self.p_hat,
            "p_lo": self.p_lo, "p_hi": self.p_hi,
            "chi_lo": list(self.chi_lo), "chi_hi": list(self.chi_hi),
            "budget_used": self.budget_used, "inconclusive": self.inconclusive,
        }


class _Sampler:
    """Coupled chi decisions: replicate r uses the same edge uniforms at every p."""

    def __init__(self, graph, target, seed, budget, batch, point_cap, cap):
        self.graph, self.target, self.seed = graph, target, seed
        self.budget, self.batch, self.point_cap, self.cap = budget, batch, point_cap, cap
        self.used = 0
        self.history = []

    def decide(self, p) -> PointDecision:
        s = s2 = 0.0
        k = 0
        side = 0
        while True:
            room = min(self.batch, self.point_cap - k, self.budget - self.used)
            if room < 2:
                break
            sizes, _ = cluster_sizes(self.graph, p, room, self.seed, rep0=k, cap=self.cap)
            self.used += room
            k += room
            x = sizes.astype(float)
            s += x.sum()
            s2 += (x * x).sum()
            mean = s / k
            var = max(s2 / k - mean * mean, 0.0) * k / (k - 1)
            se = math.sqrt(var / k)
            if abs(mean - self.target) > Z_DECIDE * se:
                side = 1 if mean > self.target else -1
                break
        if k < 2:
            est = EstimateWithError(float("nan"), float("nan"), k)
        else:
            est = EstimateWithError(mean, se, k)
        dec = PointDecision(float(p), est, side)
        self.history.append(dec)
        return dec


def _target(graph, theta):
    if not theta > 0:
        raise ValueError("theta must be positive")
    target = theta * cube_root(graph.V)
    if target <= 1.0:
        raise ValueError(f"theta V^(1/3) = {target:.6g} <= 1 = chi(0): no critical point")
    return target


def _exact_pc(graph, theta):
    """K_n only: deterministic bisection on the exact ERRG susceptibility."""
    n = graph.n
    target = _target(graph, theta)
    if target >= n:
        raise ValueError("theta n^(1/3) must be below n")
    lo, hi = 0.0, 1.0
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if exact_susceptibility(n, mid) < target:
            lo = mid
        else:
            hi = mid
    c_lo, c_hi = exact_susceptibility(n, lo), exact_susceptibility(n, hi)
    p_hat = lo if abs(c_lo - target) <= abs(c_hi - target) else hi
    return PcEstimate(float(theta), target, p_hat, lo, hi,
                      EstimateWithError(c_lo, 0.0, 0), EstimateWithError(c_hi, 0.0, 0), 0, False)


def solve_pc(graph: HammingGraph, theta: float, tol: float | None = None,
             budget: int = 10**7, seed: int = 0, exact: bool = False,
             batch: int = DEFAULT_BATCH, point_cap: int = DEFAULT_POINT_CAP,
             cap: int = DEFAULT_CAP) -> PcEstimate:
    """Solve chi(p) = theta V^(1/3).

    With ``exact=True`` (K_n only) the exact susceptibility is bisected to
    float resolution.  Otherwise each probe grows replicates in batches until
    the 3-SE interval excludes the target; a probe that hits ``point_cap`` or
    the remaining ``budget`` stops the search and marks it inconclusive.
    """
    if exact:
        if graph.d != 1:
            raise ValueError("exact mode is only available for d = 1")
        return _exact_pc(graph, theta)
    target = _target(graph, theta)
    m = graph.m
    if tol is None:
        tol = 0.05 / (m * cube_root(graph.V))
    smp = _Sampler(graph, target, seed, int(budget), int(batch), int(point_cap), cap)
    one = EstimateWithError(1.0, 0.0, 0)
    lo, hi = 0.0, None
    chi_lo, chi_hi = one, None
    inconclusive = False

    # bracket: start near 1/m and widen geometrically
    step = 0.05
    p = 1.0 / m
    while hi is None:
        p = min(p, 1.0)
        dec = smp.decide(p)
        if dec.side == 0:
            return PcEstimate(float(theta), target, p, lo, p, chi_lo, dec.chi,
                              smp.used, True, smp.history)
        if dec.side > 0:
            hi, chi_hi = p, dec.chi
            break
        lo, chi_lo = p, dec.chi
        if p >= 1.0:
            raise ValueError("chi(1) is below the target")
        p = p * (1.0 + step)
        step *= 2.0
    # if the very first probe was above, walk down toward 0 (lo stays 0 otherwise)
    if lo == 0.0:
        q = hi
        step = 0.05
        while True:
            q = q / (1.0 + step)
            step *= 2.0
            if q < 1e-300:
                break
            dec = smp.decide(q)
            if dec.side < 0:
                lo, chi_lo = q, dec.chi
                break
            if dec.side == 0:
                inconclusive = True
                break
            hi, chi_hi = q, dec.chi

    while not inconclusive and hi - lo > tol:
        mid = 0.5 * (lo + hi)
        dec = smp.decide(mid)
        if dec.side > 0:
            hi, chi_hi = mid, dec.chi
        elif dec.side < 0:
            lo, chi_lo = mid, dec.chi
        else:
            inconclusive = True
    return PcEstimate(float(theta), target, 0.5 * (lo + hi), lo, hi, chi_lo, chi_hi,
                      smp.used, inconclusive, smp.history)


# ------------------------------------------------------------------ p tilde

@dataclass(frozen=True)
class PcTilde:
    index: int
    p: float
    log_derivative: np.ndarray  # centered differences at interior grid points
    chi: np.ndarray
    boundary_hit: bool


def pc_tilde(graph: HammingGraph, p_grid, reps: int = 0, seed: int = 0,
             exact: bool = False, cap: int = DEFAULT_CAP) -> PcTilde:
    """Grid argmax of d/dp log chi(p), by centered finite differences.

    Derivatives exist at interior points only; a maximiser at the first or
    last interior point is flagged as a boundary hit.  Ties go to smaller p.
    """
    grid = np.asarray(p_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 5:
        raise ValueError("p_grid needs at least 5 points")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("p_grid must be strictly increasing")
    if grid[0] < 0 or grid[-1] > 1:
        raise ValueError("p_grid must lie in [0, 1]")
    if exact:
        if graph.d != 1:
            raise ValueError("exact mode is only available for d = 1")
        chi = np.array([exact_susceptibility(graph.n, p) for p in grid])
    else:
        reps = _check_reps(reps)
        chi = np.array([cluster_sizes(graph, p, reps, seed, cap=cap)[0].mean() for p in grid])
    lc = np.log(chi)
    deriv = (lc[2:] - lc[:-2]) / (grid[2:] - grid[:-2])
    i = int(np.argmax(deriv))
    return PcTilde(i + 1, float(grid[i + 1]), deriv, chi, i == 0 or i == deriv.size - 1)


# ------------------------------------------------------------------ window study

def window_study(d: int, n_list, theta_list, budget: int = 10**6, seed: int = 0,
                 **solve_kw) -> list[dict]:
    """One row per (n, theta): stochastic p_c, c2 estimate, line-wise bound, expansion."""
    rows = []
    for n in n_list:
        g = make_graph(d, n)
        m = g.m
        ex = pc_expansion(d, n) if d >= 2 else None
        for theta in theta_list:
            est = solve_pc(g, theta, budget=budget, seed=seed, **solve_kw)
            p_l = pl_lower_bound(d, n, theta) if d >= 2 else float("nan")
            rows.append({
                "d": d, "n": n, "theta": float(theta), "m": m, "V": g.V,
                "p_hat": est.p_hat, "p_lo": est.p_lo, "p_hi": est.p_hi,
                "c2_hat": m * m * (est.p_hat - 1.0 / m),
                "c2_lo": m * m * (est.p_lo - 1.0 / m),
                "c2_hi": m * m * (est.p_hi - 1.0 / m),
                "p_l": p_l,
                "expansion_m1": ex.term_values[0] if ex else float("nan"),
                "expansion_m2": ex.term_values[1] if ex else float("nan"),
                "budget_used": est.budget_used,
                "inconclusive": est.inconclusive,
            })
    return rows


# ------------------------------------------------------------------ two-point check

def representative(graph: HammingGraph, k: int) -> int:
    """Rank of the vertex with k leading ones and zeros elsewhere."""
    return int(sum(graph.n**i for i in range(k)))


def verify_twopoint(graph: HammingGraph, p: float, reps: int, seed: int,
                    cap: int = DEFAULT_CAP) -> dict:
    """Residuals of the estimated two-point function against its asymptotic form.

    For w at distances 0, 1, 2 and d: tau(w) - [delta + d/(d-1)/m 1{adjacent} + chi/V],
    scaled by m^max(dist, 2), with binomial standard errors.
    """
    if graph.d < 2:
        raise ValueError("the two-point asymptotics need d >= 2")
    tau = estimate_two_point_field(graph, p, reps, seed, cap=cap)
    chi = tau.chi
    d, m, V = graph.d, graph.m, graph.V
    rows = []
    for k in sorted({0, 1, 2, d}):
        if k > d:
            continue
        w = representative(graph, k)
        t = float(tau.values[w])
        formula = (k == 0) + (d / (d - 1) / m if k == 1 else 0.0) + chi / V
        scale = float(m) ** max(k, 2)
        se = math.sqrt(t * (1 - t) / reps)
        rows.append({"distance": k, "vertex": w, "tau": t, "tau_se": se, "formula": formula,
                     "residual": t - formula, "scale": scale,
                     "scaled_residual": (t - formula) * scale, "scaled_se": se * scale})
    in_regime = abs(p * m - 1.0) < 0.5
    return {"p": float(p), "chi": chi, "reps": int(reps), "in_regime": in_regime, "rows": rows}
