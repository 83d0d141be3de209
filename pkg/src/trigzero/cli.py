"""Scenario-driven experiment runner.

A scenario is one TOML file: a spectral measure, a degree sweep, seeds and a
task list.  Running it writes CSV/JSON artifacts plus a manifest; `report`
re-reads a manifest and grades every scenario against the limit-law targets.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import __version__
from .kacrice import (
    UNIVERSAL_LIMIT,
    expected_zero_ratio,
    predicted_limit,
    profile_integrand,
)
from .kernels import convolution_profile, default_grid_size
from .sampler import covariance_check, cross_correlation_check, sample_coefficients
from .spectral import correlation_of, hypothesis_report, measure_from_dict
from .szclt import (
    cf_distance,
    conditional_cf,
    default_t_grid,
    empirical_cf,
    limit_cf,
    localized_variance,
)
from .utils import fmt, json_sanitize, parallel_map
from .zeros import zero_statistics

TASKS = (
    "kacrice_sweep",
    "zero_mc",
    "integrand_profile",
    "szclt",
    "hypotheses",
    "covariance_check",
)

# report tolerances, per limit regime (see README)
RATIO_TOL = {"universal": 0.02, "non_universal": 0.03}
ATOMIC_BAND = (1.35, 2.05)
ATOMIC_MIN_SPREAD = 0.1

# localized-variance configurations exercised by the szclt task
LOCALIZED_CONFIGS = (
    ((0.0,), (1.0,)),
    ((0.0, 1.0), (1.0, -1.0)),
    ((0.0, math.pi), (1.0, 1.0)),
)
LOCALIZED_X0 = 1.0


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    name: str
    measure_decl: dict
    degrees: list
    replicates: int
    master_seed: int
    tasks: list
    output_dir: str | None = None
    t_grid: list | None = None
    eta: float = 0.5
    gamma: float = 1.0
    mc_degrees: list | None = None  # zero_mc ladder; defaults to degrees
    raw: dict = field(default_factory=dict)

    def build_measure(self):
        try:
            return measure_from_dict(self.measure_decl)
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"measure: {exc}") from exc

    def config_hash(self):
        blob = json.dumps(self.raw, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()


def _validate_config(cfg):
    if not cfg.degrees:
        raise ConfigError("degrees: must be a nonempty increasing list")
    if any(int(n) < 1 for n in cfg.degrees):
        raise ConfigError("degrees: entries must be positive integers")
    if list(cfg.degrees) != sorted(set(int(n) for n in cfg.degrees)):
        raise ConfigError("degrees: must be strictly increasing")
    unknown = [t for t in cfg.tasks if t not in TASKS]
    if unknown:
        raise ConfigError(f"tasks: unknown task(s) {unknown}; valid: {TASKS}")
    if "zero_mc" in cfg.tasks and cfg.replicates < 1:
        raise ConfigError("replicates: must be >= 1 when zero_mc is requested")
    if cfg.mc_degrees is not None:
        if not cfg.mc_degrees or any(int(n) < 1 for n in cfg.mc_degrees):
            raise ConfigError("mc_degrees: must be a nonempty list of positives")
        cfg.mc_degrees = sorted(int(n) for n in cfg.mc_degrees)
    cfg.build_measure()  # raises ConfigError on a bad measure
    return cfg


def bundled_scenario_path(name):
    from importlib.resources import files

    return files("trigzero") / "scenarios" / f"{name}.toml"


def load_scenario(spec):
    """Load a scenario config from a path or a bundled scenario name."""
    path = Path(spec)
    if not path.exists():
        candidate = bundled_scenario_path(spec)
        if candidate.is_file():
            path = candidate
        else:
            raise ConfigError(f"no such config file or bundled scenario: {spec}")
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    cfg = ScenarioConfig(
        name=raw.get("name", Path(spec).stem),
        measure_decl=raw.get("measure", {}),
        degrees=[int(n) for n in raw.get("degrees", [])],
        replicates=int(raw.get("replicates", 1)),
        master_seed=int(raw.get("master_seed", 0)),
        tasks=list(raw.get("tasks", [])),
        output_dir=raw.get("output_dir"),
        t_grid=raw.get("t_grid"),
        eta=float(raw.get("eta", 0.5)),
        gamma=float(raw.get("gamma", 1.0)),
        mc_degrees=raw.get("mc_degrees"),
        raw=raw,
    )
    return _validate_config(cfg)


# -- output helpers ------------------------------------------------------------------


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(c) for c in row])


def write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(json_sanitize(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


# -- tasks ---------------------------------------------------------------------------


def task_kacrice_sweep(cfg, measure, outdir):
    rho = correlation_of(measure, max(cfg.degrees))
    pred = predicted_limit(measure.density)
    rows = []
    entries = []
    for n, prof in zip(
        cfg.degrees,
        parallel_map(lambda n: expected_zero_ratio(rho, n), cfg.degrees),
    ):
        gap = None if pred.limit is None else abs(prof.ratio - pred.limit)
        rows.append(
            (n, prof.ratio, prof.quadrature_error_estimate, pred.limit, gap)
        )
        entries.append(
            {
                "n": n,
                "ratio": prof.ratio,
                "error_estimate": prof.quadrature_error_estimate,
                "converged": prof.converged,
            }
        )
    csv_path = outdir / "kacrice_sweep.csv"
    write_csv(csv_path, ["n", "ratio", "error_estimate", "predicted_limit", "gap"], rows)
    summary = {
        "regime": pred.regime,
        "predicted_limit": pred.limit,
        "adherence": list(pred.adherence) if pred.adherence else None,
        "rows": entries,
    }
    json_path = outdir / "kacrice_summary.json"
    write_json(json_path, summary)
    return [csv_path.name, json_path.name]


def task_integrand_profile(cfg, measure, outdir):
    n = max(cfg.degrees)
    rho = correlation_of(measure, n)
    prof = convolution_profile(rho, n, default_grid_size(n))
    vals = profile_integrand(rho, n, prof)
    path = outdir / "integrand_profile.csv"
    write_csv(path, ["x", "integrand"], zip(prof.grid, vals))
    return [path.name]


def task_zero_mc(cfg, measure, outdir):
    degrees = cfg.mc_degrees or cfg.degrees
    rho = correlation_of(measure, max(degrees))
    pred = predicted_limit(measure.density)
    rows = []
    summaries = []
    for n in degrees:
        stats = zero_statistics(measure, n, cfg.replicates, cfg.master_seed)
        kac = expected_zero_ratio(rho, n).ratio
        for i in range(stats.replicates):
            rows.append(
                (
                    cfg.name,
                    n,
                    i,
                    cfg.master_seed,
                    int(stats.counts[i]),
                    stats.ratios[i],
                    int(stats.suspicious[i]),
                )
            )
        summaries.append(
            {
                "n": n,
                "replicates": stats.replicates,
                "mean_ratio": stats.mean_ratio,
                "se": stats.se,
                "kacrice_ratio": kac,
                "predicted_limit": pred.limit,
            }
        )
    csv_path = outdir / "zero_mc.csv"
    write_csv(
        csv_path,
        ["scenario", "n", "replicate", "seed", "count", "ratio", "suspicious"],
        rows,
    )
    json_path = outdir / "zero_mc_summary.json"
    write_json(json_path, summaries)
    return [csv_path.name, json_path.name]


def task_szclt(cfg, measure, outdir):
    rho = correlation_of(measure, max(cfg.degrees))
    t_grid = (
        np.asarray(cfg.t_grid, dtype=float) if cfg.t_grid else default_t_grid()
    )
    curve_rows = []
    checks = []
    lim = limit_cf(measure.density, t_grid) if measure.density else None
    for n in cfg.degrees:
        sample = sample_coefficients(measure, n, cfg.master_seed, 0)
        emp = empirical_cf(sample, t_grid)
        cond = conditional_cf(rho, n, t_grid)
        for curve in (emp, cond):
            for t, v in zip(curve.t_grid, curve.values):
                curve_rows.append((t, v.real, v.imag, curve.kind, n))
        entry = {"n": n, "d_empirical_conditional": cf_distance(emp, cond)}
        if lim is not None:
            for t, v in zip(lim.t_grid, lim.values):
                curve_rows.append((t, v.real, v.imag, lim.kind, n))
            d_el = cf_distance(emp, lim)
            d_cl = cf_distance(cond, lim)
            entry["d_empirical_limit"] = d_el
            entry["d_conditional_limit"] = d_cl
            # sup-norm triangle inequality; fails only on a programming error
            assert d_el <= entry["d_empirical_conditional"] + d_cl + 1e-12
            entry["triangle_ok"] = True
        local = []
        for t_pts, lams in LOCALIZED_CONFIGS:
            chk = localized_variance(
                rho, n, LOCALIZED_X0, t_pts, lams, density=measure.density
            )
            local.append(
                {
                    "n": n,
                    "X0": chk.X0,
                    "t_points": list(chk.t_points),
                    "lambdas": list(chk.lambdas),
                    "variance_n": chk.variance_n,
                    "variance_limit": chk.variance_limit,
                    "rel_gap": chk.rel_gap,
                }
            )
        entry["localized"] = local
        checks.append(entry)
    csv_path = outdir / "szclt_curves.csv"
    write_csv(csv_path, ["t", "re", "im", "kind", "n"], curve_rows)
    json_path = outdir / "szclt_checks.json"
    write_json(json_path, checks)
    return [csv_path.name, json_path.name]


def task_hypotheses(cfg, measure, outdir):
    pred = predicted_limit(measure.density)
    payload = {
        "regime": pred.regime,
        "predicted_limit": pred.limit,
        "adherence": list(pred.adherence) if pred.adherence else None,
    }
    if measure.density is not None:
        rep = hypothesis_report(measure.density, eta=cfg.eta, gamma=cfg.gamma)
        payload.update(
            {
                "nodal_measure": rep.nodal_measure,
                "log_norm": rep.log_norm,
                "neg_moment": rep.neg_moment,
                "besov_exponent_estimate": rep.besov_exponent_estimate,
                "applicable_theorems": sorted(rep.applicable_theorems),
                "eta": rep.eta,
                "gamma": rep.gamma,
            }
        )
    path = outdir / "hypotheses.json"
    write_json(path, payload)
    return [path.name]


def task_covariance_check(cfg, measure, outdir):
    n = min(max(cfg.degrees), 4096)
    reps = max(50, min(cfg.replicates, 200))
    rho = correlation_of(measure, 8)
    samples = parallel_map(
        lambda i: sample_coefficients(measure, n, cfg.master_seed, i), range(reps)
    )
    rep = covariance_check(samples, rho, max_lag=8)
    indep = cross_correlation_check(samples, max_lag=8)
    payload = {
        "n": n,
        "samples": reps,
        "lags": rep.lags.tolist(),
        "rho_hat": rep.rho_hat.tolist(),
        "se": rep.se.tolist(),
        "rho_ref": rep.rho_ref.tolist(),
        "passed_lags": rep.passed_lags.tolist(),
        "passed": rep.passed,
        "ab_independent": indep,
    }
    path = outdir / "covariance_check.json"
    write_json(path, payload)
    return [path.name]


TASK_RUNNERS = {
    "kacrice_sweep": task_kacrice_sweep,
    "zero_mc": task_zero_mc,
    "integrand_profile": task_integrand_profile,
    "szclt": task_szclt,
    "hypotheses": task_hypotheses,
    "covariance_check": task_covariance_check,
}


def run_scenario(cfg, output_dir=None):
    """Execute every task of a scenario; failures are recorded, not fatal."""
    measure = cfg.build_measure()
    base = Path(output_dir or cfg.output_dir or "runs")
    outdir = base / cfg.name
    outdir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "name": cfg.name,
        "tool_version": __version__,
        "config_hash": cfg.config_hash(),
        "output_dir": str(outdir),
        "tasks": {},
    }
    for task in cfg.tasks:
        t0 = time.perf_counter()
        try:
            files = TASK_RUNNERS[task](cfg, measure, outdir)
            manifest["tasks"][task] = {
                "status": "ok",
                "files": files,
                "seconds": time.perf_counter() - t0,
            }
        except Exception as exc:  # record and keep going
            manifest["tasks"][task] = {
                "status": "failed",
                "error": f"{type(exc).__name__}: {exc}",
                "files": [],
                "seconds": time.perf_counter() - t0,
            }
    manifest_path = outdir / "manifest.json"
    write_json(manifest_path, manifest)
    return manifest_path


# -- verdicts --------------------------------------------------------------------------


@dataclass
class Verdict:
    scenario: str
    check: str
    detail: str
    status: str  # pass | fail | incomplete


def _grade_kacrice(name, outdir, verdicts):
    path = outdir / "kacrice_summary.json"
    if not path.exists():
        verdicts.append(Verdict(name, "kacrice", "missing output", "incomplete"))
        return
    summary = json.loads(path.read_text())
    rows = summary["rows"]
    ratios = [r["ratio"] for r in rows]
    if summary["regime"] == "atomic_nonconvergent":
        lo, hi = ATOMIC_BAND
        in_band = all(lo <= r <= hi for r in ratios)
        spread = max(ratios) - min(ratios)
        ok = in_band and spread >= ATOMIC_MIN_SPREAD
        verdicts.append(
            Verdict(
                name,
                "kacrice-atomic",
                f"ratios in [{lo},{hi}]={in_band}, spread={spread:.4f}",
                "pass" if ok else "fail",
            )
        )
        return
    limit = summary["predicted_limit"]
    tol = RATIO_TOL[summary["regime"]]
    final = rows[-1]
    gap = abs(final["ratio"] - limit)
    ok = gap <= tol
    detail = f"n={final['n']}: |ratio-{limit:.6f}|={gap:.4f} (tol {tol})"
    if len(rows) >= 2:
        first_gap = abs(rows[0]["ratio"] - limit)
        ok = ok and gap < first_gap
        detail += f", first gap {first_gap:.4f}"
    verdicts.append(Verdict(name, "kacrice-limit", detail, "pass" if ok else "fail"))


def _grade_zero_mc(name, outdir, verdicts):
    path = outdir / "zero_mc_summary.json"
    if not path.exists():
        verdicts.append(Verdict(name, "zero-mc", "missing output", "incomplete"))
        return
    for entry in json.loads(path.read_text()):
        gap = abs(entry["mean_ratio"] - entry["kacrice_ratio"])
        bound = 3.0 * entry["se"]
        ok = gap <= bound
        verdicts.append(
            Verdict(
                name,
                f"zero-mc-n{entry['n']}",
                f"|mc-kacrice|={gap:.5f} <= 3se={bound:.5f}",
                "pass" if ok else "fail",
            )
        )


def _grade_szclt(name, outdir, verdicts):
    path = outdir / "szclt_checks.json"
    if not path.exists():
        verdicts.append(Verdict(name, "szclt", "missing output", "incomplete"))
        return
    checks = json.loads(path.read_text())
    with_limit = [c for c in checks if "d_conditional_limit" in c]
    if len(with_limit) >= 2:
        first, last = with_limit[0], with_limit[-1]
        # the independent case is exactly at the limit for every degree
        ok = (last["d_conditional_limit"] < first["d_conditional_limit"]
              or last["d_conditional_limit"] < 1e-13)
        verdicts.append(
            Verdict(
                name,
                "szclt-deterministic",
                f"D(cond,limit): n={last['n']} {last['d_conditional_limit']:.5f}"
                f" < n={first['n']} {first['d_conditional_limit']:.5f}",
                "pass" if ok else "fail",
            )
        )
    bad_triangle = [c["n"] for c in checks if c.get("triangle_ok") is False]
    if bad_triangle:
        verdicts.append(
            Verdict(name, "szclt-triangle", f"violated at n={bad_triangle}", "fail")
        )


def _grade_covariance(name, outdir, verdicts):
    path = outdir / "covariance_check.json"
    if not path.exists():
        verdicts.append(Verdict(name, "covariance", "missing output", "incomplete"))
        return
    payload = json.loads(path.read_text())
    ok = payload["passed"] and payload["ab_independent"]
    verdicts.append(
        Verdict(
            name,
            "covariance",
            f"lags ok={payload['passed']}, a/b independent={payload['ab_independent']}",
            "pass" if ok else "fail",
        )
    )


def compare_report(manifest_path):
    """Grade one scenario manifest; returns (verdicts, exit_code)."""
    manifest = json.loads(Path(manifest_path).read_text())
    outdir = Path(manifest["output_dir"])
    name = manifest["name"]
    verdicts = []
    for task, info in manifest["tasks"].items():
        if info["status"] != "ok":
            verdicts.append(
                Verdict(name, task, info.get("error", "failed"), "incomplete")
            )
    graders = {
        "kacrice_sweep": _grade_kacrice,
        "zero_mc": _grade_zero_mc,
        "szclt": _grade_szclt,
        "covariance_check": _grade_covariance,
    }
    for task, grader in graders.items():
        if manifest["tasks"].get(task, {}).get("status") == "ok":
            grader(name, outdir, verdicts)
    bad = any(v.status != "pass" for v in verdicts)
    return verdicts, (1 if bad else 0)


def print_verdicts(verdicts, stream=None):
    stream = stream or sys.stdout
    width = max([len(v.check) for v in verdicts] + [8])
    for v in verdicts:
        print(f"{v.scenario:24s} {v.check:{width}s} {v.status:10s} {v.detail}",
              file=stream)


# -- measure shorthand for one-shot subcommands ------------------------------------------


def parse_measure_arg(text):
    """Measure from a scenario name/path or a 'kind:key=value,...' shorthand."""
    if ":" in text or text in (
        "uniform",
        "raised_cosine_squared",
    ):
        kind, _, rest = text.partition(":")
        params = {}
        if rest:
            for item in rest.split(","):
                key, _, val = item.partition("=")
                params[key.strip()] = float(val)
        if kind == "atomic":
            return measure_from_dict(
                {"atoms": [[params.get("alpha", math.sqrt(2.0)),
                            params.get("weight", 1.0)]]}
            )
        return measure_from_dict({"density": {"kind": kind, **params}})
    return load_scenario(text).build_measure()


# -- entry point -------------------------------------------------------------------------


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="trigzero",
        description="Zero-count experiments for random trigonometric polynomials",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario config (path or bundled name)")
    p_run.add_argument("config")
    p_run.add_argument("--output-dir", default=None)

    p_rep = sub.add_parser("report", help="grade a run manifest")
    p_rep.add_argument("manifest")

    p_ker = sub.add_parser("kernels", help="dump s0,s1,s2 moment profiles")
    p_ker.add_argument("--n", type=int, required=True)
    p_ker.add_argument("--measure", default="uniform")
    p_ker.add_argument("--dump", required=True)

    p_kac = sub.add_parser("kacrice", help="expected zero ratio for one degree")
    p_kac.add_argument("--measure", required=True)
    p_kac.add_argument("--n", type=int, required=True)
    p_kac.add_argument("--dump", default=None, help="CSV of x,integrand")

    p_zer = sub.add_parser("zeros", help="Monte Carlo zero counts")
    p_zer.add_argument("--measure", required=True)
    p_zer.add_argument("--n", type=int, required=True)
    p_zer.add_argument("--reps", type=int, default=50)
    p_zer.add_argument("--seed", type=int, default=0)
    p_zer.add_argument("--dump-samples", default=None,
                       help="CSV of k,a_k,b_k for replicate 0")

    p_szc = sub.add_parser("szclt", help="characteristic-function distances")
    p_szc.add_argument("--measure", required=True)
    p_szc.add_argument("--n", type=int, required=True)
    p_szc.add_argument("--seed", type=int, default=0)

    args = parser.parse_args(argv)

    if args.command == "run":
        cfg = load_scenario(args.config)
        manifest_path = run_scenario(cfg, output_dir=args.output_dir)
        print(manifest_path)
        return 0

    if args.command == "report":
        verdicts, code = compare_report(args.manifest)
        print_verdicts(verdicts)
        return code

    if args.command == "kernels":
        measure = parse_measure_arg(args.measure)
        rho = correlation_of(measure, args.n)
        prof = convolution_profile(rho, args.n)
        write_csv(
            args.dump,
            ["x", "s0", "s1", "s2"],
            zip(prof.grid, prof.s0, prof.s1, prof.s2),
        )
        print(args.dump)
        return 0

    if args.command == "kacrice":
        measure = parse_measure_arg(args.measure)
        rho = correlation_of(measure, args.n)
        prof = expected_zero_ratio(rho, args.n)
        pred = predicted_limit(measure.density)
        out = {
            "n": args.n,
            "ratio": prof.ratio,
            "error_estimate": prof.quadrature_error_estimate,
            "converged": prof.converged,
            "regime": pred.regime,
            "predicted_limit": pred.limit,
        }
        print(json.dumps(json_sanitize(out), indent=2, sort_keys=True))
        if args.dump:
            write_csv(args.dump, ["x", "integrand"], zip(prof.grid, prof.integrand))
        return 0

    if args.command == "zeros":
        measure = parse_measure_arg(args.measure)
        stats = zero_statistics(measure, args.n, args.reps, args.seed)
        rho = correlation_of(measure, args.n)
        kac = expected_zero_ratio(rho, args.n).ratio
        out = {
            "n": args.n,
            "replicates": args.reps,
            "mean_ratio": stats.mean_ratio,
            "se": stats.se,
            "kacrice_ratio": kac,
            "suspicious_total": int(stats.suspicious.sum()),
        }
        print(json.dumps(json_sanitize(out), indent=2, sort_keys=True))
        if args.dump_samples:
            sample = sample_coefficients(measure, args.n, args.seed, 0)
            write_csv(
                args.dump_samples,
                ["k", "a_k", "b_k"],
                zip(range(1, args.n + 1), sample.a, sample.b),
            )
        return 0

    if args.command == "szclt":
        measure = parse_measure_arg(args.measure)
        rho = correlation_of(measure, args.n)
        sample = sample_coefficients(measure, args.n, args.seed, 0)
        emp = empirical_cf(sample)
        cond = conditional_cf(rho, args.n)
        out = {"n": args.n, "d_empirical_conditional": cf_distance(emp, cond)}
        if measure.density is not None:
            lim = limit_cf(measure.density)
            out["d_empirical_limit"] = cf_distance(emp, lim)
            out["d_conditional_limit"] = cf_distance(cond, lim)
        print(json.dumps(json_sanitize(out), indent=2, sort_keys=True))
        return 0

    return 2  # pragma: no cover


if __name__ == "__main__":
    sys.exit(main())
