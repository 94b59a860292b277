"""Command-line entry point: ``nesterov-ode <command> ...``.

Commands
--------
run <config>      execute an experiment config, write trace CSVs and a summary
selftest          run the built-in invariant suite and print bound vs measured
list-problems     list the seeded problem generators
trace-ode         integrate the ODE for a diagonal quadratic and write a CSV
compare           scheme-versus-ODE deviation for a range of step sizes

Exit status: 0 success, 1 an asserted bound failed, 2 usage or config error,
3 a run diverged.
"""

from __future__ import annotations

import argparse
import configparser
import datetime as _dt
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis as an
from . import schemes
from .objectives import as_composite, capped_linear, quadratic, smoothed_abs
from .ode import (
    OdeParams,
    closed_form_trace,
    integrate,
    integrate_composite_lasso,
)
from .ode import write_trace_csv as write_ode_csv
from .problems import PROBLEMS, SCALES, cached_instance, list_problems
from .schemes import DivergenceError, SchemeParams
from .schemes import write_trace_csv as write_scheme_csv

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_DIVERGED = 0, 1, 2, 3

ANALYTIC_PROBLEMS = ("diag_quadratic", "smoothed_abs", "capped_linear")
ANALYSIS_OPS = ("rate_certificate", "generalized_rate", "summed_rate", "scaled_error",
                "energy", "deviation", "linear_rate_fit", "oscillation_roots",
                "velocity_ratio", "reaches", "restart_time")


class ConfigError(ValueError):
    pass


@dataclass
class RunSpec:
    id: str
    kind: str
    options: dict


@dataclass
class AnalysisSpec:
    id: str
    op: str
    options: dict


@dataclass
class ExperimentConfig:
    problem: str
    scale: str = "desk"
    seed: int = 42
    options: dict = field(default_factory=dict)
    runs: list = field(default_factory=list)
    analyses: list = field(default_factory=list)
    out: str | None = None


# ---------------------------------------------------------------------------
# config parsing

def _floats(text):
    return np.array([float(v) for v in text.replace(",", " ").split()], dtype=float)


def _bool(text):
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def parse_config(text) -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from None
    if not cp.has_section("experiment"):
        raise ConfigError("missing [experiment] section")
    exp = dict(cp["experiment"])
    if "problem" not in exp:
        raise ConfigError("[experiment] needs a 'problem' key")
    try:
        seed = int(exp.pop("seed", 42))
    except ValueError:
        raise ConfigError("seed must be an integer") from None
    cfg = ExperimentConfig(problem=exp.pop("problem"), scale=exp.pop("scale", "desk"),
                           seed=seed, out=exp.pop("out", None), options=exp)
    for sec in cp.sections():
        if sec == "experiment":
            continue
        head, _, ident = sec.partition(".")
        if not ident:
            raise ConfigError(f"section [{sec}] must be named run.<id> or analysis.<id>")
        opts = dict(cp[sec])
        if head == "run":
            kind = opts.pop("kind", "scheme")
            if kind not in ("scheme", "ode", "closed_form"):
                raise ConfigError(f"run {ident}: unknown kind {kind!r}")
            cfg.runs.append(RunSpec(ident, kind, opts))
        elif head == "analysis":
            op = opts.pop("op", None)
            if op not in ANALYSIS_OPS:
                raise ConfigError(f"analysis {ident}: op must be one of {', '.join(ANALYSIS_OPS)}")
            cfg.analyses.append(AnalysisSpec(ident, op, opts))
        else:
            raise ConfigError(f"unknown section [{sec}]")
    validate_config(cfg)
    return cfg


def validate_config(cfg: ExperimentConfig):
    if not cfg.runs:
        raise ConfigError("config defines no runs")
    if cfg.scale not in SCALES:
        raise ConfigError(f"scale must be one of {SCALES}")
    if cfg.problem not in PROBLEMS and cfg.problem not in ANALYTIC_PROBLEMS:
        raise ConfigError(f"unknown problem {cfg.problem!r}")
    ids = [r.id for r in cfg.runs]
    if len(set(ids)) != len(ids):
        raise ConfigError("run ids must be unique")
    for a in cfg.analyses:
        for key in ("run", "scheme_run", "ode_run"):
            if key in a.options and a.options[key] not in ids:
                raise ConfigError(f"analysis {a.id} references unknown run {a.options[key]!r}")
        if not any(k in a.options for k in ("run", "scheme_run")):
            raise ConfigError(f"analysis {a.id} names no run")


# ---------------------------------------------------------------------------
# problems

@dataclass
class Problem:
    objective: object
    x0: np.ndarray
    f_star: float | None
    x_star: np.ndarray | None
    eigenvalues: np.ndarray | None = None
    lasso: tuple | None = None  # (A, b, lam) when the ODE can use the lasso force
    mu: float = 0.0


def build_problem(cfg: ExperimentConfig, cache_dir=None) -> Problem:
    opts = cfg.options
    name = cfg.problem
    if name == "diag_quadratic":
        lam = _floats(opts.get("eigenvalues", "1"))
        x0 = _floats(opts.get("x0", " ".join(["1"] * lam.size)))
        obj = quadratic(lam)
        return Problem(obj, x0, 0.0, np.zeros(lam.size), eigenvalues=lam, mu=float(lam.min()))
    if name == "smoothed_abs":
        eps = float(opts.get("eps", "1e-6"))
        x0 = _floats(opts.get("x0", "1"))
        return Problem(smoothed_abs(eps, x0.size), x0, 0.0, np.zeros(x0.size))
    if name == "capped_linear":
        x0 = _floats(opts.get("x0", "1"))
        # the tightness anchor measures f - 0 on the linear piece
        return Problem(capped_linear(), x0, float(opts.get("f_star", "0")), None)
    inst = cached_instance(name, cfg.scale, cfg.seed, cache_dir=cache_dir)
    lasso = None
    h = inst.objective.h
    if h.variant == "l1" and name in ("lasso", "lasso_fat", "lasso_square"):
        lasso = (inst.data["A"], inst.data["b"], h.lam)
    f_star = None if inst.confidence == "analytic" else inst.f_star
    return Problem(inst.objective, inst.x0, f_star, inst.x_star, lasso=lasso,
                   mu=inst.objective.mu)


def _step_size(text, obj):
    text = str(text).strip().replace(" ", "")
    if text.lower() == "1/l":
        return 1.0 / obj.L
    if text.lower().endswith("/l"):
        return float(text[:-2]) / obj.L
    return float(text)


# ---------------------------------------------------------------------------
# runs and analyses

def execute_run(spec: RunSpec, prob: Problem, out: Path):
    o = spec.options
    if spec.kind == "scheme":
        obj = prob.objective
        params = SchemeParams(s=_step_size(o.get("s", "1/L"), obj), r=float(o.get("r", 3)),
                              k_max=int(o.get("k_max", 1000)), k_min=int(o.get("k_min", 10)),
                              allow_large_step=_bool(o.get("allow_large_step", "false")))
        trace = schemes.run_scheme(o.get("scheme", "oN"), obj, prob.x0, params,
                                   f_star=prob.f_star)
        write_scheme_csv(trace, out / f"{spec.id}.csv")
        return trace
    coords = _bool(o.get("coordinates", "false"))
    if spec.kind == "closed_form":
        if prob.eigenvalues is None:
            raise ConfigError(f"run {spec.id}: closed_form needs problem = diag_quadratic")
        dt, T = float(o.get("dt", 1e-3)), float(o.get("T", 10))
        t = np.arange(int(math.floor(T / dt + 1e-9)) + 1) * dt
        trace = closed_form_trace(prob.eigenvalues, prob.x0, t, float(o.get("r", 3)))
        write_ode_csv(trace, out / f"{spec.id}.csv", coordinates=coords)
        return trace
    delta = o.get("delta")
    params = OdeParams(r=float(o.get("r", 3)), dt=float(o.get("dt", 1e-3)),
                       T=float(o.get("T", 10)), delta=None if delta is None else float(delta),
                       restart=_bool(o.get("restart", "false")))
    obj = as_composite(prob.objective)
    if obj.h.is_zero:
        trace = integrate(obj.g, prob.x0, params, f_star=prob.f_star)
    elif prob.lasso is not None:
        A, b, lam = prob.lasso
        trace = integrate_composite_lasso(A, b, lam, prob.x0, params,
                                          f_star=prob.f_star if prob.f_star is not None
                                          else 0.0)
    else:
        raise ConfigError(f"run {spec.id}: the ODE needs a smooth or lasso objective")
    write_ode_csv(trace, out / f"{spec.id}.csv", coordinates=coords)
    return trace


def _bound(opts, key="bound"):
    return float(opts[key]) if key in opts else None


def _dist0_sq(prob: Problem, trace=None):
    if prob.x_star is None:
        raise ConfigError("this analysis needs a known minimizer")
    d = prob.x0 - prob.x_star
    return float(d @ d)


def execute_analysis(spec: AnalysisSpec, traces: dict, prob: Problem, out: Path):
    o = spec.options
    op = spec.op
    trace = traces.get(o.get("run"))
    name = spec.id
    if op == "rate_certificate":
        s = trace.params.s
        b = an.rate_bound(trace.k, _dist0_sq(prob), s)
        ratio = float(np.max((trace.f_gap[1:] - 1e-12) / b[1:]))
        return an.Check(name, 1.0, ratio, ratio <= 1.0, "max f_gap / (2 R^2 / (s (k+1)^2))")
    if op == "generalized_rate":
        p = trace.params
        b = an.generalized_rate_bound(trace.k, _dist0_sq(prob), p.s, p.r)
        ratio = float(np.max((trace.f_gap[1:] - 1e-12) / b[1:]))
        return an.Check(name, 1.0, ratio, ratio <= 1.0, f"r = {p.r}")
    if op == "summed_rate":
        p = trace.params
        total = float(np.sum((trace.k + p.r - 1) * trace.f_gap))
        bound = an.generalized_sum_bound(_dist0_sq(prob), p.s, p.r)
        return an.Check(name, bound, total, total <= bound, "sum (k+r-1) f_gap")
    if op == "scaled_error":
        power = float(o.get("power", 2))
        series = an.scaled_error(trace, power)
        grid = trace.t if hasattr(trace, "t") else trace.k
        an.write_series_csv(out / f"{name}.csv", grid, series, ("grid", "scaled_error"))
        measured = float(np.max(series))
        bound = _bound(o)
        return an.Check(name, bound if bound is not None else math.inf, measured,
                        bound is None or measured <= bound, f"sup of scaled error, power {power}")
    if op == "energy":
        variant = o.get("variant", "continuous_r3")
        tol = float(o.get("rel_tol", 1e-6))
        if variant.startswith("continuous"):
            mu = float(o["mu"]) if "mu" in o else (prob.mu or None)
            alpha = float(o["alpha"]) if "alpha" in o else None
            series = an.energy_continuous(trace, prob.x_star, variant,
                                          r=trace.params.r if trace.params else
                                          trace.meta.get("r", 3.0),
                                          alpha=alpha, mu=mu)
        else:
            series = an.energy_discrete(trace, prob.x_star, variant)
        an.write_series_csv(out / f"{name}.csv", series.grid, series.values, ("grid", "energy"))
        start = int(o.get("start", 0))
        inc = float(np.max(np.diff(series.values[start:]))) / series.values[0] \
            if series.values.size > start + 1 and series.values[0] != 0 else 0.0
        return an.Check(name, tol, inc, inc <= tol, series.warning or "max step increase / E(0)")
    if op == "deviation":
        st = traces[o["scheme_run"]]
        ct = traces[o["ode_run"]]
        T = float(o["T"]) if "T" in o else None
        dev = an.scheme_ode_deviation(st, ct, st.params.s, T)
        bound = _bound(o)
        return an.Check(name, bound if bound is not None else math.inf, dev,
                        bound is None or dev <= bound, "max ||x_k - X(k sqrt(s))||")
    if op == "linear_rate_fit":
        lo, hi = int(o.get("k_lo", 100)), int(o.get("k_hi", 2000))
        slope, r2 = an.linear_rate_fit(trace, (lo, hi))
        min_r2 = float(o.get("min_r2", 0.9))
        return an.Check(name, min_r2, r2, r2 >= min_r2 and slope < 0, f"slope {slope:.6g}")
    if op == "oscillation_roots":
        coord = int(o.get("coordinate", 0))
        roots = an.oscillation_roots(trace, coord, prob.x_star)
        an.write_series_csv(out / f"{name}.csv", range(len(roots)), roots, ("index", "t"))
        mu = float(o.get("mu", prob.mu))
        bound = 7.6635 / math.sqrt(mu)
        gaps = np.diff([0.0] + list(roots))
        measured = float(gaps.max()) if gaps.size else math.inf
        return an.Check(name, bound, measured, measured < bound, f"{len(roots)} roots")
    if op == "velocity_ratio":
        t_end = float(o["t_end"])
        val = an.velocity_ratio_max(trace, t_end)
        bound = _bound(o)
        return an.Check(name, bound if bound is not None else math.inf, val,
                        bound is None or val <= bound, "max ||V(u)|| / u")
    if op == "reaches":
        tol = float(o.get("tol", 1e-10))
        hit = np.nonzero(trace.f_gap <= tol)[0]
        k_hit = float(hit[0]) if hit.size else math.inf
        budget = float(o.get("within", trace.k[-1]))
        return an.Check(name, budget, k_hit, k_hit <= budget, f"first k with f_gap <= {tol:g}")
    if op == "restart_time":
        first = trace.restart_times[0] if trace.restart_times else math.inf
        bound = _bound(o)
        if bound is None:
            L = as_composite(prob.objective).L
            bound = 4.0 / (5.0 * math.sqrt(L)) - 2.0 * trace.dt
        return an.Check(name, bound, first, first >= bound, "first restart time")
    raise ConfigError(f"unknown analysis op {op!r}")


def run_config(cfg: ExperimentConfig, out: Path, deterministic=False, cache_dir=None):
    """Execute a parsed config.  Returns ``(status, summary_record)``."""
    out.mkdir(parents=True, exist_ok=True)
    prob = build_problem(cfg, cache_dir)
    traces = {}
    checks = []
    status = EXIT_OK
    diverged = None
    for spec in cfg.runs:
        try:
            traces[spec.id] = execute_run(spec, prob, out)
        except DivergenceError as exc:
            diverged = f"run {spec.id}: {exc}"
            status = EXIT_DIVERGED
            break
    if status == EXIT_OK:
        for a in cfg.analyses:
            checks.append(execute_analysis(a, traces, prob, out))
        if not all(c.passed for c in checks):
            status = EXIT_FAIL
    extra = {"problem": cfg.problem, "scale": cfg.scale, "seed": cfg.seed,
             "runs": [r.id for r in cfg.runs], "status": status}
    if diverged:
        extra["diverged"] = diverged
    if not deterministic:
        extra["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
    record = an.write_summary(out / "summary.json", checks, extra)
    return status, record


# ---------------------------------------------------------------------------
# selftest

def _canary_momentum(k, r):
    # numerator and denominator each off by one: more momentum than allowed
    return k / (k + r - 2)


def selftest_checks(inject_fault=None, cache_dir=None, iterations=2000):
    """The invariant suite as a list of :class:`analysis.Check` records."""
    from . import bessel, prox

    checks = []
    add = checks.append
    rng = np.random.default_rng(0)

    # prox
    h = prox.ProxSpec.l1(1.0)
    z = h.prox(np.array([2.0, -0.5]), 1.0)
    add(an.Check("prox l1 example", 0.0, float(np.abs(z - [1.0, 0.0]).max()),
                 np.array_equal(z, [1.0, 0.0])))
    worst = 0.0
    specs = [prox.ProxSpec.l1(0.7), prox.ProxSpec.nonneg(), prox.ProxSpec.l1_ball(1.5),
             prox.ProxSpec.nuclear(0.3, 2, 3), prox.ProxSpec.sorted_l1([3, 2, 1, 0.5, 0.1, 0])]
    for sp in specs:
        for _ in range(100):
            u, v = rng.normal(size=6) * 3, rng.normal(size=6) * 3
            worst = max(worst, np.linalg.norm(sp.prox(u, 0.8) - sp.prox(v, 0.8))
                        - np.linalg.norm(u - v))
    add(an.Check("prox nonexpansive", 1e-12, worst, worst <= 1e-12))
    w = np.full(5, 0.9)
    v = rng.normal(size=5)
    diff = float(np.abs(prox.prox_sorted_l1(v, w) - prox.soft_threshold(v, 0.9)).max())
    add(an.Check("sorted-l1 equal weights = l1", 1e-12, diff, diff <= 1e-12))

    # Bessel
    root = _bisect(bessel.bessel_j1, 3.0, 4.5)
    add(an.Check("J1 first root", 1e-3, abs(root - 3.8317), abs(root - 3.8317) <= 1e-3))
    u = math.pi / 2
    err = abs(bessel.bessel_jnu(0.5, u) - math.sqrt(2 / (math.pi * u)) * math.sin(u))
    add(an.Check("J_1/2 closed form", 1e-10, err, err <= 1e-10))
    us = np.linspace(0.5, 30, 50)
    err = float(np.abs(bessel.bessel_jnu(1.0, us) - bessel.bessel_j1(us)).max())
    add(an.Check("J_nu(1) = J1", 1e-10, err, err <= 1e-10))

    # closed form against the integrator, energy decay
    lam, x0 = np.array([0.04, 0.01]), np.ones(2)
    tr = integrate(quadratic(lam), x0, OdeParams(dt=1e-3, T=50))
    cf = closed_form_trace(lam, x0, tr.t)
    dev = float(np.abs(tr.X - cf.X).max())
    add(an.Check("closed form vs integrator", 1e-3, dev, dev <= 1e-3))
    E = an.energy_continuous(tr, np.zeros(2), "continuous_r3")
    inc = E.max_increase() / E.values[0]
    add(an.Check("continuous energy decay", 1e-6, inc, inc <= 1e-6))

    # stability threshold
    L = 1.0
    try:
        integrate(quadratic([L]), np.ones(1), OdeParams(dt=2.5 / math.sqrt(L), T=2500))
        diverged = False
    except DivergenceError:
        diverged = True
    add(an.Check("divergence above 2/sqrt(L)", 1.0, float(diverged), diverged))

    # rate certificates on the desk catalog
    saved = schemes.momentum
    if inject_fault == "momentum":
        schemes.momentum = _canary_momentum
    try:
        for name in list_problems():
            inst = cached_instance(name, cache_dir=cache_dir)
            obj = inst.objective
            s = 1.0 / obj.L
            f_star = None if inst.confidence == "analytic" else inst.f_star
            t = schemes.nesterov_run(obj, inst.x0, SchemeParams(s=s, k_max=iterations),
                                     f_star=f_star, keep_iterates=False)
            b = an.rate_bound(t.k, inst.dist0_sq(), s)
            ratio = float(np.max((t.f_gap[1:] - 1e-12) / b[1:]))
            add(an.Check(f"rate certificate {name}", 1.0, ratio, ratio <= 1.0))
        q = cached_instance("quadratic", cache_dir=cache_dir)
        t = schemes.nesterov_run(q.objective, q.x0, SchemeParams(s=1.0 / q.objective.L, r=4,
                                                                 k_max=iterations))
        E = an.energy_discrete(t, q.x_star, "discrete_r")
        inc = E.max_increase() / E.values[0]
        add(an.Check("discrete energy decay r=4", 1e-10, inc, inc <= 1e-10))
    finally:
        schemes.momentum = saved
    return checks


def _bisect(f, a, b, tol=1e-12):
    fa = f(a)
    while b - a > tol:
        m = 0.5 * (a + b)
        fm = f(m)
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def print_checks(checks, stream=None):
    stream = stream or sys.stdout
    width = max(len(c.name) for c in checks) if checks else 10
    print(f"{'check':<{width}}  {'bound':>12}  {'measured':>12}  result", file=stream)
    for c in checks:
        print(f"{c.name:<{width}}  {c.bound:>12.4g}  {c.measured:>12.4g}  "
              f"{'PASS' if c.passed else 'FAIL'}", file=stream)


# ---------------------------------------------------------------------------
# argument parsing

def _parser():
    p = argparse.ArgumentParser(prog="nesterov-ode",
                                description="Accelerated gradient schemes and their ODE limit.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="execute an experiment config")
    r.add_argument("config")
    r.add_argument("--out", help="output directory (overrides the config)")
    r.add_argument("--seed", type=int, help="problem seed (overrides the config)")
    r.add_argument("--scale", choices=SCALES, help="problem scale (overrides the config)")
    r.add_argument("--deterministic-summary", action="store_true",
                   help="omit the timestamp from summary.json")
    r.add_argument("--cache-dir", help="reference-solution cache directory")

    s = sub.add_parser("selftest", help="run the invariant suite")
    s.add_argument("--inject-fault", choices=["momentum"], help=argparse.SUPPRESS)
    s.add_argument("--cache-dir")

    sub.add_parser("list-problems", help="list problem generators")

    t = sub.add_parser("trace-ode", help="integrate the ODE on a diagonal quadratic")
    t.add_argument("--eigenvalues", default="0.04,0.01")
    t.add_argument("--x0", default=None)
    t.add_argument("--r", type=float, default=3.0)
    t.add_argument("--dt", type=float, default=1e-3)
    t.add_argument("--T", type=float, default=50.0)
    t.add_argument("--delta", type=float, default=None)
    t.add_argument("--restart", action="store_true")
    t.add_argument("--closed-form", action="store_true", help="sample the exact solution")
    t.add_argument("--coordinates", action="store_true", help="add x0..x{n-1} columns")
    t.add_argument("--out", default="ode_trace.csv")

    c = sub.add_parser("compare", help="scheme-versus-ODE deviation report")
    c.add_argument("--eigenvalues", default="0.04,0.01")
    c.add_argument("--x0", default=None)
    c.add_argument("--r", type=float, default=3.0)
    c.add_argument("--T", type=float, default=10.0)
    c.add_argument("--steps", default="1e-2,1e-3,1e-4", help="comma-separated step sizes s")
    c.add_argument("--out", default=None, help="optional CSV of (s, deviation)")
    return p


def _cmd_run(args):
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = parse_config(text)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.scale is not None:
            cfg.scale = args.scale
        out = Path(args.out or cfg.out or "out")
        status, record = run_config(cfg, out, args.deterministic_summary, args.cache_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    checks = [an.Check(**c) for c in record["checks"]]
    if checks:
        print_checks(checks)
    if status == EXIT_DIVERGED:
        print(f"diverged: {record.get('diverged')}", file=sys.stderr)
    print(f"wrote {out}")
    return status


def _cmd_selftest(args):
    started = time.perf_counter()
    checks = selftest_checks(args.inject_fault, args.cache_dir)
    print_checks(checks)
    failed = [c.name for c in checks if not c.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} passed "
          f"in {time.perf_counter() - started:.1f} s")
    if failed:
        print("failed: " + ", ".join(failed), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _cmd_list(args):
    for name in list_problems():
        gen, desk, paper, fig, desc = PROBLEMS[name]
        dims = " ".join(f"{k}={v}" for k, v in desk.items())
        print(f"{name:22s} {fig:6s} {dims:36s} {desc}")
    for name in ANALYTIC_PROBLEMS:
        print(f"{name:22s} {'-':6s} {'(analytic)':36s}")
    return EXIT_OK


def _quad_args(args):
    lam = _floats(args.eigenvalues)
    x0 = np.ones(lam.size) if args.x0 is None else _floats(args.x0)
    if x0.size != lam.size or np.any(lam <= 0):
        raise ConfigError("x0 and eigenvalues must have equal length; eigenvalues > 0")
    return lam, x0


def _cmd_trace_ode(args):
    try:
        lam, x0 = _quad_args(args)
        if args.closed_form:
            t = np.arange(int(math.floor(args.T / args.dt + 1e-9)) + 1) * args.dt
            trace = closed_form_trace(lam, x0, t, args.r)
        else:
            trace = integrate(quadratic(lam), x0, OdeParams(r=args.r, dt=args.dt, T=args.T,
                                                            delta=args.delta,
                                                            restart=args.restart))
        write_ode_csv(trace, args.out, coordinates=args.coordinates)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DivergenceError as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    print(f"wrote {args.out} ({len(trace)} samples)")
    return EXIT_OK


def _cmd_compare(args):
    try:
        lam, x0 = _quad_args(args)
        steps = [float(v) for v in args.steps.split(",")]
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    dt = min(1e-4, min(math.sqrt(s) for s in steps) / 10)
    t = np.arange(int(math.floor(args.T / dt + 1e-9)) + 2) * dt
    ct = closed_form_trace(lam, x0, t, args.r)
    rows = []
    q = quadratic(lam)
    print(f"{'s':>10}  {'deviation':>12}")
    for s in steps:
        k_max = int(math.floor(args.T / math.sqrt(s) + 1e-9))
        it = schemes.nesterov_run(q, x0, SchemeParams(s=s, r=args.r, k_max=k_max,
                                                      allow_large_step=True))
        d = an.scheme_ode_deviation(it, ct, s, args.T)
        rows.append((s, d))
        print(f"{s:>10.3g}  {d:>12.6g}")
    if args.out:
        an.write_series_csv(args.out, [r[0] for r in rows], [r[1] for r in rows],
                            ("s", "deviation"))
    return EXIT_OK


def main(argv=None):
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors and 0 on --help
        return int(exc.code or 0)
    handler = {"run": _cmd_run, "selftest": _cmd_selftest, "list-problems": _cmd_list,
               "trace-ode": _cmd_trace_ode, "compare": _cmd_compare}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
