"""The acceptance suite as plain functions, shared by ``hyperperc verify`` and the tests.

Each check returns a :class:`CheckResult` whose ``details`` hold only
deterministic values (no timings), so a digest over the results is
reproducible for a fixed master seed.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
import subprocess
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import oracles
from .asymptotics import cube_root, pl_lower_bound
from .critpoint import solve_pc
from .diagrams import (
    GroupField,
    group_convolve,
    open_triangle,
    pi1_ladder_bound,
    polygon_diagram,
    triangle_diagram,
)
from .errg import brute_force_oracle, exact_moments, residual_scaling_report
from .exploration import bf_explore, check_coupling, linewise_explore, sample_gw_progeny
from .graph import difference_rank, make_graph
from .percolation import EstimateWithError, SampleSpec, cluster_sizes, estimate_pi0, grow_cluster
from .randwalk import mixing_time, nbw_distance_distribution


@dataclass
class CheckResult:
    criterion: int
    name: str
    passed: bool
    details: dict
    seconds: float = field(default=0.0, compare=False)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.criterion:>2}: {self.name} ({self.seconds:.1f} s)"

    def as_dict(self) -> dict:
        return {"criterion": self.criterion, "name": self.name, "passed": self.passed,
                "details": self.details}


def _f(x):
    return float(x)


def check_errg_vs_brute(seed: int = 0) -> CheckResult:
    worst = {"double": 0.0, "extended": 0.0}
    for n in (3, 4, 5, 6):
        for p in (0.1, 0.3, 0.5, 0.9):
            b = brute_force_oracle(n, p)
            for prec in worst:
                e = exact_moments(n, p, prec)
                err = max(abs(e.chi - b.chi), abs(e.second_moment - b.second_moment),
                          abs(e.expected_surplus - b.expected_surplus))
                worst[prec] = max(worst[prec], err)
    ok = max(worst.values()) < 1e-10
    return CheckResult(1, "exact ERRG moments match exhaustive enumeration to 1e-10", ok,
                       {"max_abs_error_double": worst["double"],
                        "max_abs_error_extended": worst["extended"]})


def check_residual_scaling(seed: int = 0) -> CheckResult:
    ok = True
    det = {}
    for lam in (0.3, 0.5, 0.7):
        rep = residual_scaling_report(lam, [100, 200, 400, 800])
        rc, rs = rep.ratios("chi"), rep.ratios("surplus")
        m2n = [row.r_m2 * row.n for row in rep.rows]
        ok &= all(0.15 <= r <= 0.45 for r in rc + rs)
        ok &= all(v <= 3 * m2n[0] for v in m2n)
        det[str(lam)] = {"chi_ratios": rc, "surplus_ratios": rs, "m2_residual_times_n": m2n}
    return CheckResult(2, "susceptibility, surplus and second-moment residuals scale as stated",
                       bool(ok), det)


def check_coupling_suite(seed: int = 0, reps: int = 100_000) -> CheckResult:
    # Nine z-scores at 3 SE: roughly one seed in ten trips one of them by chance,
    # more often for the dead-ghost statistic whose T^2 tail makes z non-normal.
    # Seeds 0-6 pass; 7 and 20240 do not.
    g = make_graph(1, 100)
    ok = True
    det = {}
    for lam in (0.4, 0.5, 0.8):
        p = lam / 99
        r = check_coupling(g, p, reps, seed)
        mo = exact_moments(100, p)
        z_chi = r.brw_dead.z_against(mo.chi)
        z_sp = r.brw_ghosts_active.z_against(mo.expected_surplus)
        ok &= abs(z_chi) < 3 and abs(z_sp) < 3 and abs(r.z_dead) < 3
        det[str(lam)] = {"z_dead_vs_exact_chi": z_chi, "z_ghosts_active_vs_exact_surplus": z_sp,
                         "z_dead_ghost_identity": r.z_dead, "z_size_vs_clusters": r.z_size,
                         "z_surplus_vs_clusters": r.z_surplus}
    return CheckResult(3, "BF/BRW coupling identities on K_100 within 3 SE", bool(ok), det)


def check_exploration_equivalence(seed: int = 0, configs: int = 1000) -> CheckResult:
    det = {}
    ok = True
    for (d, n, p) in ((2, 8, 0.1), (3, 6, 0.05)):
        g = make_graph(d, n)
        mism = 0
        for r in range(configs):
            s = SampleSpec(g, p, seed, r)
            c = grow_cluster(s)
            b = bf_explore(s)
            lw = linewise_explore(s)
            mism += (b.T != c.size) or (len(b.surplus_edges) != c.surplus) \
                or (len(lw.dead) != c.size) or (lw.dead != c.vertices)
        ok &= mism == 0
        det[f"H({d},{n})"] = {"mismatches": int(mism), "configs": configs}
    return CheckResult(4, "BF and line-wise explorations reproduce grow_cluster exactly",
                       bool(ok), det)


def check_mixing(seed: int = 0) -> CheckResult:
    worst = 0.0
    mix = {}
    ok = True
    for (d, n) in ((2, 3), (2, 4), (3, 3)):
        g = make_graph(d, n)
        for t in range(1, 11):
            worst = max(worst, float(np.abs(
                nbw_distance_distribution(d, n, t) - oracles.nbw_class_distribution(g, t)).max()))
        for alpha in (1 / 3, 1 / n, 0.05):
            a, b = mixing_time(d, n, alpha), oracles.nbw_mixing_time(g, alpha)
            mix[f"H({d},{n}) alpha={alpha:.4g}"] = [a, b]
            ok &= a == b
    ratio = max(mixing_time(2, n, 1 / n) / math.log(n) for n in range(10, 201))
    ok &= worst <= 1e-14 and ratio <= 10
    return CheckResult(5, "lumped NBW chain and mixing time match the directed-edge chain",
                       bool(ok), {"max_abs_error": worst, "mixing_times": mix,
                                  "max_tmix_over_log_n": ratio})


def check_diagrams(seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    conv_err = 0.0
    for (d, n) in ((2, 3), (3, 4)):
        g = make_graph(d, n)
        f = GroupField(g, rng.random(g.V))
        h = GroupField(g, rng.random(g.V))
        conv_err = max(conv_err, float(np.abs(
            group_convolve(f, h, "fft").values - oracles.literal_convolution(g, f.values, h.values)
        ).max()))
    g = make_graph(2, 3)
    tau = rng.random(g.V)
    tau[0] = 1.0
    F = GroupField(g, tau)
    p = 0.05
    x, y = 1, 5
    z = int(difference_rank(g, y, x))
    errs = {
        "triangle": abs(triangle_diagram(F, z) - oracles.literal_triangle(g, tau, x, y)),
        "open_triangle": abs(open_triangle(F, p, z) - oracles.literal_polygon(g, tau, p, 3, 1, x, y)),
        "polygon_4_1": abs(polygon_diagram(F, p, 4, 1, z) - oracles.literal_polygon(g, tau, p, 4, 1, x, y)),
        "ladder": abs(pi1_ladder_bound(F, p).value - oracles.literal_ladder(g, tau, p)),
    }
    ok = conv_err <= 1e-9 and max(errs.values()) <= 1e-8
    return CheckResult(6, "FFT convolution and diagram sums match literal nested sums", bool(ok),
                       {"convolution_max_error": conv_err, **{k: float(v) for k, v in errs.items()}})


def check_exact_pc(seed: int = 0) -> CheckResult:
    from .errg import exact_susceptibility
    r = solve_pc(make_graph(1, 64), 1.0, exact=True)
    resid = abs(exact_susceptibility(64, r.p_hat) - cube_root(64))
    return CheckResult(7, "exact-mode bisection on K_64 solves chi = 64^(1/3) to 1e-10",
                       resid <= 1e-10, {"p_hat": r.p_hat, "residual": resid})


def check_lower_bound(seed: int = 0, budget: int = 2_000_000, reps: int = 20_000) -> CheckResult:
    ok = True
    det = {}
    for d in (2, 3, 4):
        for n in (10, 20):
            g = make_graph(d, n)
            est = solve_pc(g, 1.0, budget=budget, seed=seed)
            p_l = pl_lower_bound(d, n, 1.0)
            order_ok = est.p_lo >= p_l - est.width
            sizes, _ = cluster_sizes(g, p_l, reps, seed + 1)
            c = EstimateWithError.from_samples(sizes)
            zs = EstimateWithError.from_samples(sample_gw_progeny(n, p_l, d, seed + 2, reps))
            joint = math.hypot(c.standard_error, zs.standard_error)
            dom_ok = c.mean <= zs.mean + 3 * joint
            ok &= order_ok and dom_ok
            det[f"H({d},{n})"] = {"p_l": p_l, "p_lo": est.p_lo, "p_hi": est.p_hi,
                                  "inconclusive": est.inconclusive, "order_ok": bool(order_ok),
                                  "chi_at_p_l": list(c), "gw_mean_at_p_l": list(zs),
                                  "domination_ok": bool(dom_ok)}
    return CheckResult(8, "stochastic p_c brackets sit above the line-wise lower bound",
                       bool(ok), det)


def check_c2_sign(seed: int = 0, budget: int = 10**7) -> CheckResult:
    g = make_graph(4, 20)
    est = solve_pc(g, 1.0, budget=budget, seed=seed)
    m = g.m
    c_lo, c_hi = m * m * (est.p_lo - 1 / m), m * m * (est.p_hi - 1 / m)
    c_hat = m * m * (est.p_hat - 1 / m)
    ok = c_hat > 0 and c_lo > 0
    return CheckResult(9, "second critical-point coefficient is positive on H(4,20)", bool(ok),
                       {"c2_hat": c_hat, "c2_lo": c_lo, "c2_hi": c_hi, "p_lo": est.p_lo,
                        "p_hi": est.p_hi, "budget_used": est.budget_used,
                        "inconclusive": est.inconclusive})


def check_pi0(seed: int = 0, reps: int = 100_000, large: bool = True,
              budget: int = 2_000_000) -> CheckResult:
    g = make_graph(1, 6)
    exact = oracles.enumerate_pi0(g, 0.3)
    est = estimate_pi0(g, 0.3, reps, seed)
    z = est.z_against(exact)
    ok = abs(z) < 3
    det = {"K6_exact": exact, "K6_estimate": list(est), "K6_z": z}
    if large:
        g = make_graph(3, 12)
        pc = solve_pc(g, 1.0, budget=budget, seed=seed)
        e = estimate_pi0(g, pc.p_hat, reps, seed + 1)
        lhs = g.m * e.mean
        rhs = 5 / 8 - 3 * e.standard_error * g.m
        ok = ok and lhs >= rhs
        det.update({"H(3,12)_p_hat": pc.p_hat, "H(3,12)_m_pi0": lhs,
                    "H(3,12)_m_se": e.standard_error * g.m, "H(3,12)_threshold": rhs})
    return CheckResult(10, "doubly-connected expectation matches enumeration and its lower bound",
                       bool(ok), det)


def check_determinism(seed: int = 0, suite: str = "3,4", threads=(1, 4)) -> CheckResult:
    """Run ``verify`` in fresh processes at several thread counts and compare digests."""
    env = dict(os.environ)
    env.pop("HYPERPERC_THREADS", None)
    env["NUMBA_NUM_THREADS"] = str(max(threads))
    digests = {}
    for t in threads:
        proc = subprocess.run(
            [sys.executable, "-m", "hyperperc", "verify", "--suite", suite,
             "--seed", str(seed), "--threads", str(t)],
            capture_output=True, text=True, env=env)
        try:
            digests[str(t)] = json.loads(proc.stdout)["result"]["digest"]
        except (ValueError, KeyError):
            digests[str(t)] = f"exit {proc.returncode}: {proc.stderr.strip()[-200:]}"
    ok = len(set(digests.values())) == 1 and all(len(v) == 64 for v in digests.values())
    return CheckResult(11, "verify digests are identical across thread counts", ok,
                       {"suite": suite, "digests": digests})


CHECKS = {
    1: check_errg_vs_brute,
    2: check_residual_scaling,
    3: check_coupling_suite,
    4: check_exploration_equivalence,
    5: check_mixing,
    6: check_diagrams,
    7: check_exact_pc,
    8: check_lower_bound,
    9: check_c2_sign,
    10: check_pi0,
    11: check_determinism,
}

SUITES = {
    "quick": (1, 2, 3, 4, 5, 6, 7),
    "full": tuple(range(1, 12)),
}


def run_check(k: int, seed: int = 0, **kw) -> CheckResult:
    t0 = time.perf_counter()
    res = CHECKS[k](seed=seed, **kw)
    res.seconds = time.perf_counter() - t0
    return res


def parse_suite(name: str) -> tuple:
    if name in SUITES:
        return SUITES[name]
    try:
        ks = tuple(int(x) for x in name.split(","))
    except ValueError:
        raise ValueError(f"unknown suite {name!r}; use one of {sorted(SUITES)} or e.g. '1,5'")
    bad = [k for k in ks if k not in CHECKS]
    if bad:
        raise ValueError(f"no such criteria: {bad}")
    return ks


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def results_digest(results) -> str:
    doc = _jsonable([r.as_dict() for r in results])
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()
