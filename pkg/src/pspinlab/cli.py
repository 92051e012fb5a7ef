"""pspinlab <experiment> --config <path> [--workers K] [--out DIR]

Writes report.json (deterministic), one CSV per curve and run_meta.json
(timestamps and machine details, kept apart so report.json stays
byte-identical across re-runs and worker counts).

Exit codes: 0 success, 2 invalid config, 3 failure while running.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import math
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import EXPERIMENTS, RunConfig, load_config
from .errors import ConfigError, PSpinLabError
from .experiments import (barycenter_estimate, chaos_curve, conditional_overlap, default_c,
                          field_curve, hermite_fit, log_convexity_report, slice_decay, superconcentration)
from .experiments._common import Z95, disorder
from .montecarlo import EstimatorConfig, derive_seed, summarize
from .report import SCHEMA_VERSION, write_csv, write_json
from .solve import anneal, exact_cap, ground_state_exact, solve
from .tensor import load_stack

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3
DEFAULT_OUT = "pspinlab-out"
PERMUTATION_ALPHA = 0.0027  # two-sided 3-sigma level for the chi-square test


def _check(name, passed, **extra):
    return {"name": name, "passed": bool(passed), **extra}


def _stat_row(stats):
    return {"estimate": stats.mean, "stderr": stats.stderr, "n": stats.n}


# ---- experiment runners: each returns (results, checks, {csv name: (columns, rows)})


def _curve_tables(curve):
    rows, hist = [], []
    for k, t in enumerate(curve.t_grid):
        xs, ab = curve.xi_stats[k], curve.abs_stats[k]
        p = xs.mean
        rows.append({"t": t, "phi": p, "phi_se": xs.stderr, "abs_overlap": ab.mean,
                     "abs_overlap_se": ab.stderr, "n": xs.n,
                     "eps_schedule": 1 / math.sqrt(math.log(1 / p)) if 0 < p < 1 else None})
        edges, counts = curve.histograms[k]
        for lo, hi, c in zip(edges[:-1], edges[1:], counts):
            hist.append({"t": t, "bin_lo": lo, "bin_hi": hi, "count": int(c)})
    return {
        "chaos_curve.csv": (["t", "phi", "phi_se", "abs_overlap", "abs_overlap_se", "n",
                             "eps_schedule"], rows),
        "overlap_histogram.csv": (["t", "bin_lo", "bin_hi", "count"], hist),
    }


def _curve_checks(curve):
    checks = []
    if 0.0 in curve.t_grid:
        k = curve.t_grid.index(0.0)
        checks.append(_check("phi_at_0_exact", curve.phi[k] == 1.0 and curve.phi_se[k] == 0.0,
                             value=curve.phi[k], stderr=curve.phi_se[k]))
    checks.append(_check("phi_in_unit_interval", bool(np.all((curve.phi >= 0) & (curve.phi <= 1)))))
    if np.count_nonzero(curve.phi > 0) < 3:
        checks.append(_check("log_convexity", False, detail="fewer than 3 points with phi > 0"))
        return checks, None
    rep = log_convexity_report(curve)
    for kind, rows in (("monotone", rep.monotone), ("log_convexity", rep.log_convexity)):
        for r in rows:
            checks.append(_check(kind, r["z"] <= 3, t=r["t"], violation=r["violation"],
                                 stderr=r["stderr"], z=r["z"]))
    return checks, rep


def _chaos_from(curve):
    checks, rep = _curve_checks(curve)
    results = {"N": curve.n, "points": [{"t": t, **_stat_row(s), "abs_overlap": _stat_row(a)}
                                        for t, s, a in zip(curve.t_grid, curve.xi_stats,
                                                           curve.abs_stats)],
               "eps_schedule": curve.eps_table()}
    if rep is not None:
        results["n_violations"] = len(rep.violations)
        results["max_z"] = rep.max_z
    return results, checks, _curve_tables(curve), rep


def _chaos(cfg, est, cap):
    curve = chaos_curve(cfg.mixture, cfg.params["N"], cfg.params["t_grid"], est, cap)
    return _chaos_from(curve)[:3]


def _convexity(cfg, est, cap):
    curve = chaos_curve(cfg.mixture, cfg.params["N"], cfg.params["t_grid"], est, cap)
    results, checks, tables, rep = _chaos_from(curve)
    if rep is None:
        rep = log_convexity_report(curve)  # raises DegenerateCurve
    fit = hermite_fit(curve, cfg.params["L_max"])
    results["convexity"] = rep.to_dict()
    results["hermite_fit"] = fit.to_dict()
    se = fit.sum_weights_se or 0.0
    checks.append(_check("hermite_weights_nonnegative", bool(np.all(fit.weights >= 0))))
    checks.append(_check("hermite_sum_matches_phi0", abs(fit.sum_weights - curve.phi[0]) <= 3 * se + 1e-9,
                         value=fit.sum_weights, stderr=se))
    conv_rows = [{"kind": "monotone", "t_a": r["t"][0], "t_b": r["t"][1], "t_c": None,
                  "violation": r["violation"], "stderr": r["stderr"], "z": r["z"]}
                 for r in rep.monotone]
    conv_rows += [{"kind": "log_convexity", "t_a": r["t"][0], "t_b": r["t"][1], "t_c": r["t"][2],
                   "violation": r["violation"], "stderr": r["stderr"], "z": r["z"]}
                  for r in rep.log_convexity]
    tables["convexity.csv"] = (["kind", "t_a", "t_b", "t_c", "violation", "stderr", "z"], conv_rows)
    tables["hermite_weights.csv"] = (["l", "weight"],
                                     [{"l": k + 1, "weight": w} for k, w in enumerate(fit.weights)])
    return results, checks, tables


def _field(cfg, est, cap):
    fc = field_curve(cfg.mixture, cfg.params["N"], cfg.params["h_grid"], est, cap)
    checks = [_check("per_sample_convexity", fc.convexity_violations == 0,
                     value=fc.convexity_violations)]
    for row in fc.symmetry:
        checks.append(_check("symmetry", row["within_3se"], h=row["h"], value=row["estimate"],
                             stderr=row["stderr"], z=abs(row["estimate"]) / row["stderr"]
                             if row["stderr"] > 0 else None))
    if fc.slope is not None:
        s = fc.slope
        checks.append(_check("slope_at_0", abs(s.mean) <= 3 * s.stderr, h=fc.slope_h,
                             value=s.mean, stderr=s.stderr))
    rows = [{"h": h, "M": s.mean, "M_se": s.stderr, "n": s.n} for h, s in zip(fc.h_grid, fc.stats)]
    return fc.to_dict(), checks, {"field_curve.csv": (["h", "M", "M_se", "n"], rows)}


def _slice(cfg, est, cap):
    sd = slice_decay(cfg.mixture, cfg.params["N"], cfg.params["eps_grid"], est, cap)
    checks = [_check("gap_nonpositive", sd.max_gap <= 0, value=sd.max_gap)]
    for o in sd.ordering:
        checks.append(_check("ordered", o["ordered"], eps=o["eps"], value=o["estimate"],
                             stderr=o["stderr"]))
    checks.append(_check("c_hat_positive", sd.c_hat > 0, value=sd.c_hat, stderr=sd.c_se, r2=sd.r2))
    rows = [{"eps": e, "gap": s.mean, "gap_se": s.stderr, "n": s.n}
            for e, s in zip(sd.eps_grid, sd.gaps)]
    return sd.to_dict(), checks, {"slice_decay.csv": (["eps", "gap", "gap_se", "n"], rows)}


def _superconc(cfg, est, cap):
    rep = superconcentration(cfg.mixture, cfg.params["N_list"], est, cfg.params["s_grid"], cap)
    checks, rows, tails = [], [], []
    for pt in rep.points:
        checks.append(_check("var_positive", pt.var_over_n > 0, N=pt.n, value=pt.var_over_n))
        for t in pt.tails:
            checks.append(_check("tail_bound", t["within_bound"], N=pt.n, s=t["s"],
                                 value=t["frequency"], stderr=t["stderr"], bound=t["bound"]))
            tails.append({"N": pt.n, **{k: t[k] for k in ("s", "frequency", "stderr", "bound")}})
        rows.append({"N": pt.n, "f_mean": pt.f.mean, "f_se": pt.f.stderr,
                     "var_over_N": pt.var_over_n, "var_over_N_se": pt.var_over_n_se, "n": pt.f.n})
    for tr in rep.trend:
        checks.append(_check("decreasing_95", tr["decreasing_95"], N=tr["N"],
                             value=tr["difference"], stderr=tr["stderr"]))
    return rep.to_dict(), checks, {
        "superconc.csv": (["N", "f_mean", "f_se", "var_over_N", "var_over_N_se", "n"], rows),
        "tails.csv": (["N", "s", "frequency", "stderr", "bound"], tails),
    }


def _barycenter(cfg, est, cap):
    rep = barycenter_estimate(cfg.mixture, cfg.params["N"], cfg.params["eps_grid"], est, cap)
    checks = [
        _check("level1_bound", rep.norm <= rep.level1_bound + 3 * rep.norm_se, value=rep.norm,
               stderr=rep.norm_se, bound=rep.level1_bound),
        _check("alignment", rep.alignment_z <= 3, value=rep.alignment.mean,
               reference=rep.e_hat.mean, z=rep.alignment_z),
    ]
    if rep.permutation:
        checks.append(_check("permutation_symmetry", rep.permutation["p_value"] >= PERMUTATION_ALPHA,
                             value=rep.permutation["chi2"], p_value=rep.permutation["p_value"]))
    rows = [{k: f[k] for k in ("eps", "max_feature", "m", "ratio_to_N_eps2")} for f in rep.slice_features]
    return rep.to_dict(), checks, {
        "slice_features.csv": (["eps", "max_feature", "m", "ratio_to_N_eps2"], rows)}


def _conditional(cfg, est, cap):
    p = cfg.params
    n = p["N"]
    c = p.get("c")
    if c is None:
        c = default_c(cfg.mixture, n, est, cap)
    reports = [conditional_overlap(cfg.mixture, n, a, p.get("delta_grid"), est, c, cap)
               for a in p["alpha_grid"]]
    checks, rows = [], []
    for rep in reports:
        checks.append(_check("gauge_bitwise_agreement", rep.gauge_agrees, alpha=rep.alpha))
        for ev in rep.events:
            b = ev["B_N"]
            rows.append({"alpha": rep.alpha, "delta": ev["delta"],
                         "xi_overlap": rep.xi_overlap.mean, "xi_overlap_se": rep.xi_overlap.stderr,
                         "abs_overlap": rep.abs_overlap.mean, "abs_overlap_se": rep.abs_overlap.stderr,
                         "p_overlap": ev["overlap_at_least_delta"]["estimate"],
                         "p_overlap_se": ev["overlap_at_least_delta"]["stderr"],
                         "p_A": ev["A_N"]["estimate"], "p_A_se": ev["A_N"]["stderr"],
                         "p_B": None if b is None else b["estimate"],
                         "p_B_se": None if b is None else b["stderr"], "n": rep.abs_overlap.n})
    order = sorted(range(len(reports)), key=lambda k: reports[k].alpha)
    for lo, hi in zip(order, order[1:]):
        a, b = reports[lo], reports[hi]
        for ev_a, ev_b in zip(a.events, b.events):
            if ev_a["delta"] != ev_b["delta"]:
                continue
            d = summarize((b.abs_samples >= ev_b["delta"] - 1e-12).astype(float)
                          - (a.abs_samples >= ev_a["delta"] - 1e-12).astype(float))
            checks.append(_check("overlap_frequency_nonincreasing", d.mean <= Z95 * d.stderr,
                                 alpha=[a.alpha, b.alpha], delta=ev_a["delta"], value=d.mean,
                                 stderr=d.stderr))
    results = {"N": n, "c": c, "by_alpha": [r.to_dict() for r in reports]}
    cols = ["alpha", "delta", "xi_overlap", "xi_overlap_se", "abs_overlap", "abs_overlap_se",
            "p_overlap", "p_overlap_se", "p_A", "p_A_se", "p_B", "p_B_se", "n"]
    return results, checks, {"conditional_overlap.csv": (cols, rows)}


def _solve(cfg, est, cap):
    p = cfg.params
    method, steps = p["method"], p["anneal_steps"]
    if "disorder_file" in p:
        instances = [(0, load_stack(p["disorder_file"]))]
    else:
        instances = [(i, disorder(cfg.mixture, p["N"], derive_seed(cfg.master_seed, i)))
                     for i in range(cfg.n_samples)]
    rows = []
    for i, g in instances:
        seed = derive_seed(cfg.master_seed, i)
        if method == "exact":
            gs = ground_state_exact(g, cap)
        elif method == "anneal":
            gs = anneal(g, steps=steps, seed=seed)
        else:
            gs = solve(g, cap, steps=steps, seed=seed)
        rows.append({"index": i, "N": g.n, "value": gs.value, "value_over_N": gs.value / g.n,
                     "exact": gs.exact,
                     "sigma": "".join("+" if s > 0 else "-" for s in gs.sigma_star)})
    stats = summarize([r["value_over_N"] for r in rows]) if len(rows) > 1 else None
    results = {"instances": rows, "value_over_N": None if stats is None else _stat_row(stats)}
    checks = [_check("all_exact", all(r["exact"] for r in rows))]
    return results, checks, {"solve.csv": (["index", "N", "value", "value_over_N", "exact", "sigma"],
                                           rows)}


RUNNERS = {
    "chaos-curve": _chaos, "convexity-report": _convexity, "field-curve": _field,
    "slice-decay": _slice, "superconc": _superconc, "barycenter": _barycenter,
    "conditional-overlap": _conditional, "solve": _solve,
}


def execute(cfg: RunConfig, workers: int = 1) -> tuple[dict, dict]:
    """Run ``cfg``; returns (report, csv tables). Raises PSpinLabError on failure."""
    est = EstimatorConfig(max(cfg.n_samples, 2), cfg.master_seed, workers)
    results, checks, tables = RUNNERS[cfg.experiment](cfg, est, cfg.exact_cap)
    report = {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "pspinlab", "version": __version__},
        "experiment": cfg.experiment,
        "config": cfg.echo(),
        "master_seed": cfg.master_seed,
        "exact_cap": exact_cap(cfg.exact_cap),
        "results": results,
        "checks": checks,
        "all_checks_passed": all(c["passed"] for c in checks),
    }
    return report, tables


def run(config_path, experiment: str | None = None, workers: int = 1,
        out: str | None = None) -> Path:
    """Load, execute and write one run. Returns the output directory."""
    cfg = load_config(config_path, experiment)
    out_dir = Path(out or cfg.output_dir or DEFAULT_OUT)
    started = _dt.datetime.now(_dt.timezone.utc)
    t0 = time.perf_counter()
    report, tables = execute(cfg, workers)
    elapsed = time.perf_counter() - t0
    out_dir.mkdir(parents=True, exist_ok=True)
    write_json(out_dir / "report.json", report)
    for name, (cols, rows) in tables.items():
        write_csv(out_dir / name, cols, rows)
    write_json(out_dir / "run_meta.json", {
        "started_utc": started.isoformat(), "elapsed_seconds": elapsed, "workers": workers,
        "config_path": str(config_path), "output_dir": str(out_dir),
        "python": platform.python_version(), "numpy": np.__version__, "platform": platform.platform(),
        "files": sorted(["report.json", *tables]),
    })
    return out_dir


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pspinlab", description="Ground-state experiments for mixed p-spin models.")
    ap.add_argument("experiment", help=" | ".join(EXPERIMENTS))
    ap.add_argument("--config", required=True, help="key = value or JSON config file")
    ap.add_argument("--workers", type=int, default=1, help="sample-level threads (output is unaffected)")
    ap.add_argument("--out", help="output directory (overrides output_dir in the config)")
    ap.add_argument("--version", action="version", version=f"pspinlab {__version__}")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        out_dir = run(args.config, args.experiment, args.workers, args.out)
    except ConfigError as exc:
        print(f"config error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        if not Path(args.config).is_file():
            print(f"config error: cannot read {args.config}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except PSpinLabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(out_dir / "report.json")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
