"""Command-line front end: ``hyperperc <command> [flags]``.

Exit codes: 0 success, 1 a verification check failed, 2 invalid input,
3 inconclusive statistical result, 4 resource cap reached.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import __version__

EXIT_OK, EXIT_FAILED, EXIT_INVALID, EXIT_INCONCLUSIVE, EXIT_CAP = 0, 1, 2, 3, 4


class CliError(Exception):
    def __init__(self, msg, code=EXIT_INVALID):
        super().__init__(msg)
        self.code = code


# ------------------------------------------------------------------ helpers

def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, Fraction):
        return str(x)
    return x


def _canonical(doc) -> str:
    return json.dumps(_jsonable(doc), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _float_list(s: str) -> list:
    return [float(x) for x in s.split(",") if x.strip()]


def _int_list(s: str) -> list:
    return [int(x) for x in s.split(",") if x.strip()]


def _graph(a):
    from .graph import make_graph
    if a.d is None or a.n is None:
        raise CliError("--d and --n are required")
    return make_graph(a.d, a.n)


def _need(a, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(a, n) is None]
    if missing:
        raise CliError(f"missing required flag(s): {' '.join(missing)}")


def _est(e):
    return {"mean": e.mean, "standard_error": e.standard_error, "replicates": e.replicates}


# Each command returns (result, table, units, status) where ``table`` is a list
# of flat dicts for CSV output and ``units`` maps column -> unit label.

def cmd_chi(a):
    from .percolation import estimate_chi
    _need(a, "p")
    g = _graph(a)
    e = estimate_chi(g, a.p, a.reps, a.seed, cap=a.cap)
    res = {"quantity": "susceptibility", "d": g.d, "n": g.n, "p": a.p, **_est(e)}
    return res, [res], {"mean": "vertices", "standard_error": "vertices", "p": "probability"}, 0


def cmd_twopoint(a):
    from .critpoint import verify_twopoint
    from .graph import digits_array
    from .percolation import estimate_two_point_field
    _need(a, "p")
    g = _graph(a)
    if a.asymptotics:
        rep = verify_twopoint(g, a.p, a.reps, a.seed, cap=a.cap)
        return rep, rep["rows"], {"tau": "probability", "formula": "probability"}, 0
    f = estimate_two_point_field(g, a.p, a.reps, a.seed, cap=a.cap)
    se = f.standard_errors()
    digs = digits_array(g, np.arange(g.V))
    rows = [{"z": int(z), "digits": " ".join(map(str, digs[z])),
             "distance": int(np.count_nonzero(digs[z])), "tau": float(f.values[z]),
             "tau_se": float(se[z])} for z in range(g.V)]
    res = {"quantity": "two_point_function", "d": g.d, "n": g.n, "p": a.p,
           "replicates": f.replicates, "chi": f.chi, "rows": rows}
    return res, rows, {"tau": "probability", "tau_se": "probability", "z": "rank"}, 0


def cmd_pc(a):
    from .critpoint import solve_pc
    _need(a, "theta")
    g = _graph(a)
    r = solve_pc(g, a.theta, tol=a.tol, budget=a.budget, seed=a.seed, exact=a.exact,
                 cap=a.cap)
    res = {"quantity": "critical_point", "d": g.d, "n": g.n, **r.as_dict(),
           "history": [{"p": h.p, "chi": _est(h.chi), "side": h.side} for h in r.history]}
    row = {k: v for k, v in r.as_dict().items() if not isinstance(v, list)}
    code = EXIT_INCONCLUSIVE if r.inconclusive else 0
    return res, [row], {"p_hat": "probability", "p_lo": "probability", "p_hi": "probability",
                        "target": "vertices", "budget_used": "cluster growths"}, code


def cmd_pc_bounds(a):
    from .asymptotics import cube_root, pc_expansion, pc_from_pi, pi_coefficients, pl_lower_bound
    _need(a, "theta")
    g = _graph(a)
    ex = pc_expansion(g.d, g.n)
    lo_c, up_c = pi_coefficients(g.d)
    res = {
        "quantity": "critical_point_bounds", "d": g.d, "n": g.n, "m": g.m, "V": g.V,
        "theta": a.theta,
        "expansion_coefficients": [str(c) for c in ex.terms],
        "expansion_terms": list(ex.term_values),
        "expansion_value": ex.value,
        "error_order": ex.error_order,
        "p_l": pl_lower_bound(g.d, g.n, a.theta),
        "pi0_lower_coefficient": str(lo_c), "pi1_upper_coefficient": str(up_c),
        "window_width": 1.0 / (g.m * cube_root(g.V)),
    }
    if a.pi_hat is not None:
        res["p_from_pi"] = pc_from_pi(a.pi_hat, a.theta, g.m, g.V)
    row = {k: v for k, v in res.items() if not isinstance(v, list)}
    return res, [row], {"p_l": "probability", "expansion_value": "probability"}, 0


def cmd_pc_tilde(a):
    from .critpoint import pc_tilde
    g = _graph(a)
    if a.grid:
        grid = _float_list(a.grid)
    else:
        _need(a, "p_min", "p_max")
        grid = list(np.linspace(a.p_min, a.p_max, a.points))
    r = pc_tilde(g, grid, reps=a.reps, seed=a.seed, exact=a.exact, cap=a.cap)
    rows = [{"p": float(p), "chi": float(c),
             "log_derivative": float(r.log_derivative[i - 1]) if 0 < i < len(grid) - 1 else None}
            for i, (p, c) in enumerate(zip(grid, r.chi))]
    res = {"quantity": "log_derivative_argmax", "d": g.d, "n": g.n, "index": r.index,
           "p_tilde": r.p, "boundary_hit": r.boundary_hit, "rows": rows}
    return res, rows, {"p": "probability", "chi": "vertices", "log_derivative": "1/probability"}, 0


def cmd_errg(a):
    from .errg import brute_force_oracle, exact_moments, residual_scaling_report
    if a.residuals:
        _need(a, "lam")
        ns = _int_list(a.n_list)
        rep = residual_scaling_report(a.lam, ns, a.precision)
        rows = rep.as_dicts()
        res = {"quantity": "residual_scaling", "lam": a.lam, "rows": rows,
               "chi_ratios": rep.ratios("chi"), "surplus_ratios": rep.ratios("surplus")}
        return res, rows, {"r_chi": "vertices", "r_surplus": "edges", "r_m2": "vertices^2"}, 0
    _need(a, "n", "p")
    if a.mode == "mc":
        from .graph import make_graph
        from .percolation import EstimateWithError, cluster_sizes
        s, e = cluster_sizes(make_graph(1, a.n), a.p, a.reps, a.seed, cap=a.cap)
        res = {"quantity": "errg_moments", "mode": "mc", "n": a.n, "p": a.p,
               "chi": _est(EstimateWithError.from_samples(s)),
               "second_moment": _est(EstimateWithError.from_samples(s.astype(float) ** 2)),
               "surplus": _est(EstimateWithError.from_samples(e - s + 1))}
        row = {"n": a.n, "p": a.p, "chi": res["chi"]["mean"], "chi_se": res["chi"]["standard_error"],
               "second_moment": res["second_moment"]["mean"], "surplus": res["surplus"]["mean"]}
        return res, [row], {"chi": "vertices", "surplus": "edges"}, 0
    mo = brute_force_oracle(a.n, a.p) if a.mode == "brute" else exact_moments(a.n, a.p, a.precision)
    res = {"quantity": "errg_moments", "mode": a.mode, "n": a.n, "p": a.p,
           "precision": a.precision if a.mode == "exact" else None,
           "chi": mo.chi, "second_moment": mo.second_moment,
           "expected_edges": mo.expected_edges, "surplus": mo.expected_surplus,
           "pmf": list(mo.pmf)}
    row = {k: v for k, v in res.items() if k != "pmf"}
    return res, [row], {"chi": "vertices", "second_moment": "vertices^2", "surplus": "edges",
                        "expected_edges": "edges"}, 0


def cmd_explore(a):
    from . import exploration as X
    from .percolation import EstimateWithError, SampleSpec
    g = _graph(a)
    _need(a, "p")
    k = a.kind
    if k == "bf":
        t = X.bf_explore(SampleSpec(g, a.p, a.seed, a.replicate), a.source, cap=a.cap)
        res = {"kind": k, "T": t.T, "dead": sorted(t.order), "surplus_edges": sorted(t.surplus_edges),
               "active_size_by_step": list(t.active_size_by_step)}
        row = {"T": t.T, "surplus": len(t.surplus_edges)}
    elif k == "linewise":
        t = X.linewise_explore(SampleSpec(g, a.p, a.seed, a.replicate), a.source, cap=a.cap)
        res = {"kind": k, "T": t.T, "dead": sorted(t.dead), "parent_edges": sorted(t.parent_edges)}
        row = {"T": t.T, "parent_edges": len(t.parent_edges)}
    elif k == "brw":
        t = X.brw_explore(g, a.p, a.seed, a.replicate)
        res = {"kind": k, "dead": t.dead, "ghosts_active": t.ghosts_active,
               "ghosts_dead": t.ghosts_dead, "cumulative_dead_sum": t.cumulative_dead_sum}
        row = dict(res)
    elif k == "coupling":
        r = X.check_coupling(g, a.p, a.reps, a.seed, cap=a.cap)
        res = {"kind": k, "p": a.p, "reps": r.reps, "z_size": r.z_size, "z_surplus": r.z_surplus,
               "z_dead": r.z_dead, "brw_dead": _est(r.brw_dead),
               "cluster_size": _est(r.cluster_size),
               "brw_ghosts_active": _est(r.brw_ghosts_active),
               "cluster_surplus": _est(r.cluster_surplus)}
        row = {"p": a.p, "reps": r.reps, "z_size": r.z_size, "z_surplus": r.z_surplus,
               "z_dead": r.z_dead}
    else:  # gw
        z = X.sample_gw_progeny(g.n, a.p, g.d, a.seed, a.reps)
        e = EstimateWithError.from_samples(z) if len(z) >= 2 else None
        res = {"kind": k, "p": a.p, "reps": a.reps,
               "progeny": _est(e) if e else {"value": int(z[0])}}
        row = {"p": a.p, "mean": e.mean if e else int(z[0]),
               "standard_error": e.standard_error if e else 0.0}
    return res, [row], {"T": "steps", "mean": "vertices"}, 0


def cmd_mixing(a):
    from .randwalk import mixing_time, nbw_point_max
    g = _graph(a)
    res = {"quantity": "nbw_mixing", "d": g.d, "n": g.n}
    if a.t is not None:
        res["t"] = a.t
        res["nbw_point_max"] = nbw_point_max(g.d, g.n, a.t)
    alpha = a.alpha if a.alpha is not None else 1.0 / g.n
    res["alpha"] = alpha
    res["t_mix"] = mixing_time(g.d, g.n, alpha)
    return res, [dict(res)], {"t_mix": "steps", "alpha": "relative"}, 0


def cmd_diagrams(a):
    from . import diagrams as D
    from .percolation import estimate_two_point_field
    _need(a, "p")
    g = _graph(a)
    if a.kind == "M":
        e = D.estimate_M(g, a.p, a.reps, a.seed, cap=a.cap)
        res = {"kind": "M", "p": a.p, **_est(e), "m_times_M": g.m * e.mean}
        return res, [res], {"mean": "dimensionless"}, 0
    tau = estimate_two_point_field(g, a.p, a.reps, a.seed, cap=a.cap)
    z = a.z if a.z is not None else 0
    res = {"kind": a.kind, "p": a.p, "z": z, "chi": tau.chi, "reps": a.reps}
    if a.kind == "triangle":
        res.update(D.triangle_at_zero_report(tau, tau.chi))
        res["value"] = D.triangle_diagram(tau, z)
    elif a.kind == "open-triangle":
        v = D.open_triangle(tau, a.p, z)
        res.update(value=v, m_excess=g.m * (v - 3 * tau.chi**3 / g.V))
    elif a.kind == "polygon":
        res.update(i=a.i, j=a.j, value=D.polygon_diagram(tau, a.p, a.i, a.j, z))
    else:  # ladder
        lb = D.pi1_ladder_bound(tau, a.p)
        res.update(value=lb.value, excluded_term=lb.excluded_term, crude_bound=lb.crude_bound)
    return res, [res], {"value": "dimensionless"}, 0


def cmd_window_study(a):
    from .critpoint import window_study
    if a.d is None:
        raise CliError("--d is required")
    rows = window_study(a.d, _int_list(a.n_list), _float_list(a.theta_list), budget=a.budget,
                        seed=a.seed, cap=a.cap)
    code = EXIT_INCONCLUSIVE if any(r["inconclusive"] for r in rows) else 0
    return {"quantity": "window_study", "rows": rows}, rows, \
        {"p_hat": "probability", "c2_hat": "dimensionless", "p_l": "probability"}, code


def cmd_verify(a):
    from .acceptance import parse_suite, results_digest, run_check
    ks = parse_suite(a.suite)
    results = []
    for k in ks:
        r = run_check(k, seed=a.seed)
        print(r.line(), file=sys.stderr, flush=True)
        results.append(r)
    digest = results_digest(results)
    res = {"suite": a.suite, "results": [r.as_dict() for r in results], "digest": digest,
           "passed": all(r.passed for r in results)}
    rows = [{"criterion": r.criterion, "name": r.name, "passed": r.passed} for r in results]
    return res, rows, {}, 0 if res["passed"] else EXIT_FAILED


COMMANDS = {
    "chi": cmd_chi, "twopoint": cmd_twopoint, "pc": cmd_pc, "pc-bounds": cmd_pc_bounds,
    "pc-tilde": cmd_pc_tilde, "errg": cmd_errg, "explore": cmd_explore, "mixing": cmd_mixing,
    "diagrams": cmd_diagrams, "window-study": cmd_window_study, "verify": cmd_verify,
}


# ------------------------------------------------------------------ parser

def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--d", type=int)
    g.add_argument("--n", type=int)
    g.add_argument("--p", type=float)
    g.add_argument("--theta", type=float)
    g.add_argument("--reps", type=_positive_int, default=10_000)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", help="write the result here (plus <out>.manifest.json)")
    g.add_argument("--format", choices=("json", "csv"), default="json")
    g.add_argument("--threads", type=_positive_int,
                   help="worker threads (HYPERPERC_THREADS overrides)")
    g.add_argument("--cap", type=_positive_int, default=10**7, help="cluster size cap")
    g.add_argument("--force", action="store_true", help="overwrite existing output")

    ap = argparse.ArgumentParser(prog="hyperperc",
                                 description="Percolation on Hamming graphs and G(n, p).")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("chi", parents=[common], help="Monte Carlo susceptibility")
    s = sub.add_parser("twopoint", parents=[common], help="two-point function field")
    s.add_argument("--asymptotics", action="store_true",
                   help="report residuals against the asymptotic two-point form")
    s = sub.add_parser("pc", parents=[common], help="solve chi(p) = theta V^(1/3)")
    s.add_argument("--tol", type=float)
    s.add_argument("--budget", type=_positive_int, default=10**7)
    s.add_argument("--exact", action="store_true", help="exact bisection (d = 1)")
    s = sub.add_parser("pc-bounds", parents=[common], help="expansion and line-wise lower bound")
    s.add_argument("--pi-hat", type=float, dest="pi_hat")
    s = sub.add_parser("pc-tilde", parents=[common], help="argmax of d/dp log chi on a grid")
    s.add_argument("--grid", help="comma-separated p values")
    s.add_argument("--p-min", type=float, dest="p_min")
    s.add_argument("--p-max", type=float, dest="p_max")
    s.add_argument("--points", type=int, default=21)
    s.add_argument("--exact", action="store_true")
    s = sub.add_parser("errg", parents=[common], help="cluster moments of G(n, p)")
    mode = s.add_mutually_exclusive_group()
    mode.add_argument("--exact", dest="mode", action="store_const", const="exact")
    mode.add_argument("--brute", dest="mode", action="store_const", const="brute")
    mode.add_argument("--mc", dest="mode", action="store_const", const="mc")
    s.set_defaults(mode="exact")
    s.add_argument("--precision", choices=("double", "extended"), default="double")
    s.add_argument("--residuals", action="store_true", help="residual scaling table")
    s.add_argument("--lam", type=float)
    s.add_argument("--n-list", dest="n_list", default="100,200,400,800")
    s = sub.add_parser("explore", parents=[common], help="exploration processes")
    s.add_argument("kind", choices=("bf", "brw", "linewise", "coupling", "gw"))
    s.add_argument("--replicate", type=int, default=0)
    s.add_argument("--source", type=int, default=0)
    s = sub.add_parser("mixing", parents=[common], help="non-backtracking mixing time")
    s.add_argument("--alpha", type=float)
    s.add_argument("--t", type=int)
    s = sub.add_parser("diagrams", parents=[common], help="diagram sums from an estimated field")
    s.add_argument("kind", choices=("triangle", "open-triangle", "polygon", "ladder", "M"))
    s.add_argument("--i", type=int, default=3)
    s.add_argument("--j", type=int, default=0)
    s.add_argument("--z", type=int)
    s = sub.add_parser("window-study", parents=[common], help="p_c over a grid of n and theta")
    s.add_argument("--n-list", dest="n_list", required=True)
    s.add_argument("--theta-list", dest="theta_list", default="0.5,1,2")
    s.add_argument("--budget", type=_positive_int, default=10**6)
    s = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    s.add_argument("--suite", default="quick", help="'quick', 'full' or criteria like '1,5,7'")
    return ap


def _csv_text(rows, units) -> str:
    buf = io.StringIO()
    cols = []
    for r in rows:
        for k in r:
            if k not in cols and not isinstance(r[k], (list, dict)):
                cols.append(k)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"{c} [{units.get(c, '-')}]" for c in cols])
    for r in rows:
        vals = []
        for c in cols:
            v = _jsonable(r.get(c))
            vals.append("" if v is None else repr(v) if isinstance(v, float) else v)
        w.writerow(vals)
    return buf.getvalue()


def _emit(a, argv, res, rows, units, started):
    text = _csv_text(rows, units) if a.format == "csv" else _canonical(
        {"command": a.command, "parameters": _params(a), "result": res, "version": __version__})
    if not a.out:
        sys.stdout.write(text)
        return
    data = text.encode("utf-8")
    with open(a.out, "wb") as fh:
        fh.write(data)
    manifest = {
        "command": a.command,
        "argv": list(argv),
        "parameters": _params(a),
        "master_seed": a.seed,
        "version": __version__,
        "threads": a._threads,
        "started": started,
        "finished": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "outputs": {os.path.basename(a.out): hashlib.sha256(data).hexdigest()},
    }
    with open(a.out + ".manifest.json", "w", encoding="utf-8") as fh:
        fh.write(_canonical(manifest))


def _params(a) -> dict:
    skip = {"out", "format", "threads", "force", "_threads"}
    return {k: v for k, v in vars(a).items() if k not in skip}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_INVALID
    from ._parallel import set_threads
    from .percolation import ClusterOverflowError
    from .randwalk import MixingCapError

    started = _dt.datetime.now(_dt.timezone.utc).isoformat()
    try:
        if a.out:
            if os.path.exists(a.out) and not a.force:
                raise CliError(f"{a.out} exists; pass --force to overwrite")
            if os.path.exists(a.out + ".manifest.json") and not a.force:
                raise CliError(f"{a.out}.manifest.json exists; pass --force to overwrite")
        try:
            a._threads = set_threads(a.threads)
        except ValueError as e:
            raise CliError(f"invalid thread count: {e}")
        res, rows, units, code = COMMANDS[a.command](a)
        _emit(a, argv, res, rows, units, started)
        return code
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except (ClusterOverflowError, MixingCapError) as e:
        print(f"resource cap: {e}", file=sys.stderr)
        return EXIT_CAP
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
