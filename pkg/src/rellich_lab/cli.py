"""Command-line front end.

Subcommands: constants, roots, hardy-seq, bubble, minimize, mountain-pass,
sweep. Settings come from built-in defaults, then a ``key = value`` file
given by ``--config``, then explicit flags. Reports print as JSON on stdout;
with ``--out DIR`` the JSON and CSV artifacts are also written there.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

import argparse
import itertools
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import constants as C
from .errors import DomainError
from .reports import csv_text, to_json, write_profile_csv, write_text

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3
JOBS_ENV = "RELLICH_LAB_JOBS"

DEFAULTS = {
    "dim": "8",
    "s": "0",
    "gamma": "0",
    "eps": None,
    "a": "1",
    "delta": "0.25",
    "grid_points": "2048",
    "t_min": "-20",
    "t_max": "20",
    "out": None,
    "jobs": None,
    "seed": "12345",
    "task": "minimize",
    "mc_samples": "200000",
    "starts": "1",
}

EPS_DEFAULTS = {
    "hardy-seq": "1e-2,1e-3,1e-4,1e-5",
    "bubble": "1e-2,3e-3,1e-3,3e-4,1e-4",
    "sweep": "1e-2,3e-3,1e-3,3e-4,1e-4",
}

SWEEP_TASKS = ("minimize", "bubble-gap", "constants")


class ValidationError(Exception):
    pass


# ------------------------------------------------------------ settings


def read_config(path):
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    settings = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read config file {path}: {exc}") from exc
    for number, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{number}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS or key == "config":
            raise ValidationError(f"{path}:{number}: unknown key {key!r}")
        settings[key] = value
    return settings


def resolve_settings(args):
    settings = dict(DEFAULTS)
    if args.config:
        settings.update(read_config(args.config))
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    if settings["jobs"] is None:
        settings["jobs"] = os.environ.get(JOBS_ENV, "1")
    if settings["eps"] is None:
        settings["eps"] = EPS_DEFAULTS.get(args.command)
    return settings


def _floats(text, name):
    try:
        values = [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise ValidationError(f"--{name}: expected comma-separated numbers, got {text!r}") from exc
    if not values or not all(math.isfinite(v) for v in values):
        raise ValidationError(f"--{name}: expected finite numbers, got {text!r}")
    return values


def _ints(text, name):
    values = _floats(text, name)
    if any(v != int(v) for v in values):
        raise ValidationError(f"--{name}: expected integers, got {text!r}")
    return [int(v) for v in values]


def _single(values, name):
    if len(values) != 1:
        raise ValidationError(f"--{name} takes a single value for this command")
    return values[0]


class RunConfig:
    """Validated settings for one invocation."""

    def __init__(self, command, settings):
        self.command = command
        self.dims = _ints(settings["dim"], "dim")
        self.s_values = _floats(settings["s"], "s")
        self.gammas = _floats(settings["gamma"], "gamma")
        self.eps = _floats(settings["eps"], "eps") if settings["eps"] else None
        self.a = _single(_floats(settings["a"], "a"), "a")
        self.delta = _single(_floats(settings["delta"], "delta"), "delta")
        self.grid_points = _single(_ints(settings["grid_points"], "grid-points"), "grid-points")
        self.t_min = _single(_floats(settings["t_min"], "t-min"), "t-min")
        self.t_max = _single(_floats(settings["t_max"], "t-max"), "t-max")
        self.jobs = _single(_ints(settings["jobs"], "jobs"), "jobs")
        self.seed = _single(_ints(settings["seed"], "seed"), "seed")
        self.mc_samples = _single(_ints(settings["mc_samples"], "mc-samples"), "mc-samples")
        self.starts = _single(_ints(settings["starts"], "starts"), "starts")
        self.task = settings["task"]
        self.out = Path(settings["out"]) if settings["out"] else None
        if self.jobs < 1:
            raise ValidationError(f"--jobs must be >= 1, got {self.jobs}")
        if self.task not in SWEEP_TASKS:
            raise ValidationError(f"--task must be one of {', '.join(SWEEP_TASKS)}, got {self.task!r}")
        if self.starts < 1:
            raise ValidationError("--starts must be positive")
        if self.mc_samples < 1:
            raise ValidationError("--mc-samples must be positive")
        for N in self.dims:
            C.DimensionConfig(N)
        from .radial import LogGrid

        self.grid = LogGrid(self.t_min, self.t_max, self.grid_points)
        if self.eps is not None and any(e <= 0 for e in self.eps):
            raise ValidationError("--eps values must be positive")

    def cfg(self):
        return C.DimensionConfig(
            _single(self.dims, "dim"), _single(self.s_values, "s"), _single(self.gammas, "gamma")
        )


# ------------------------------------------------------------ commands


def _monte_carlo_moment(N, q, samples, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((samples, N))
    x1 = x[:, 0] / np.linalg.norm(x, axis=1)
    return C.sphere_area(N) * float(np.mean(np.where(x1 > 0, np.abs(x1) ** q, 0.0)))


def cmd_constants(rc):
    cfg = rc.cfg()
    roots = C.indicial_roots(cfg)
    hc = C.hardy_constants(cfg.N)
    ps = C.critical_exponent(cfg)
    report = {
        "N": cfg.N,
        "s": cfg.s,
        "gamma": cfg.gamma,
        "critical_exponent": ps,
        "critical_exponent_0": C.critical_exponent((cfg.N, 0.0)),
        "interior": hc.interior,
        "half_space": hc.half_space,
        "cone_min_index": hc.cone_min_index,
        "indicial_roots": _roots_dict(cfg.N, roots),
        "sphere_moments": {
            "w0": C.sphere_moment(cfg.N, 0),
            "w2": C.sphere_moment(cfg.N, 2),
            "w_critical": C.sphere_moment(cfg.N, ps),
            "full_sphere_area": C.sphere_area(cfg.N),
            "w2_monte_carlo": _monte_carlo_moment(cfg.N, 2, rc.mc_samples, rc.seed),
            "monte_carlo_samples": rc.mc_samples,
            "seed": rc.seed,
        },
    }
    return report, {}


def _roots_dict(N, roots):
    names = ("alpha_minus", "alpha_plus", "beta_minus", "beta_plus")
    out = dict(zip(names, roots.as_tuple()))
    out["residuals"] = list(roots.residuals)
    out["polynomial_values"] = [C.indicial_polynomial(N, v) for v in roots.as_tuple()]
    return out


def cmd_roots(rc):
    cfg = rc.cfg()
    report = {"N": cfg.N, "gamma": cfg.gamma}
    report.update(_roots_dict(cfg.N, C.indicial_roots(cfg)))
    return report, {}


def cmd_hardy_seq(rc):
    from .testfuncs import extrapolated_ratio, hardy_sequence_table, log_slopes

    N = _single(rc.dims, "dim")
    eps = sorted(rc.eps, reverse=True)
    if len(eps) < 2:
        raise ValidationError("hardy-seq needs at least two --eps values")
    rows = hardy_sequence_table(N, eps)
    w2 = C.sphere_moment(N, 2)
    gamma_h = C.half_space_hardy_constant(N)
    slope_b, slope_h = log_slopes(rows)
    ratios = [r.ratio for r in rows]
    report = {
        "N": N,
        "target_ratio": gamma_h,
        "ratios": ratios,
        "monotone_toward_target": all(
            abs(b - gamma_h) < abs(a - gamma_h) for a, b in zip(ratios, ratios[1:])
        ),
        "extrapolated_ratio": extrapolated_ratio(rows[-2], rows[-1]),
        "slope_bending": slope_b,
        "slope_hardy": slope_h,
        "expected_slope_bending": 2 * w2 * gamma_h,
        "expected_slope_hardy": 2 * w2,
        "slope_ratio": slope_b / slope_h,
    }
    csv = csv_text(
        ("epsilon", "bending", "hardy", "ratio"),
        [(r.epsilon, r.bending, r.hardy, r.ratio) for r in rows],
    )
    return report, {"hardy_seq.csv": csv}


def cmd_bubble(rc):
    from .errors import FitRejected
    from .testfuncs import (
        BubbleSpec,
        bubble_constants,
        bubble_energies,
        fit_asymptotics,
        resolve_hardy_coefficient,
    )

    cfg = rc.cfg()
    eps = sorted(rc.eps, reverse=True)
    full = bubble_constants(cfg.N)
    rows, points = [], []
    gaps = []
    for e in eps:
        spec = BubbleSpec(cfg.N, e, rc.a, rc.delta)
        terms = bubble_energies(spec, cfg.gamma, full=full)
        gap, err = terms.quotient_gap(cfg.gamma)
        gaps.append((e, gap, err))
        rows.append((e, terms.bending, terms.hardy, terms.sobolev_0, full.sobolev_constant + gap))
        points.append((e, terms.hardy))
    try:
        fit = fit_asymptotics(points, cfg.N)
        fit_json = fit.as_dict()
        fit_json["accepted"] = True
    except FitRejected as exc:
        fit = exc.fit
        fit_json = fit.as_dict()
        fit_json["accepted"] = False
    if cfg.N >= 9:
        fit_json["coefficient_resolution"] = resolve_hardy_coefficient(fit, cfg.N, rc.a)
    best = min(gaps, key=lambda g: g[1])
    report = {
        "N": cfg.N,
        "gamma": cfg.gamma,
        "a": rc.a,
        "delta": rc.delta,
        "fit": fit_json,
        "sobolev_constant": full.sobolev_constant,
        "min_quotient_gap": best[1],
        "min_quotient_gap_error": best[2],
        "min_quotient_epsilon": best[0],
        "below_sobolev_by_3_error_bars": best[1] < -3 * best[2],
    }
    csv = csv_text(("epsilon", "bending", "hardy", "sobolev0", "quotient"), rows)
    return report, {"bubble.csv": csv}


def _minimize_start(cfg, grid, k, index):
    from .minimizer import minimize_quotient, multi_start_inits

    return minimize_quotient(cfg, grid, init=multi_start_inits(grid, cfg.N, k)[index])


def cmd_minimize(rc):
    cfg = rc.cfg()
    args = [(cfg, rc.grid, rc.starts, j) for j in range(rc.starts)]
    if rc.jobs == 1 or rc.starts == 1:
        runs = [_minimize_start(*a) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=rc.jobs) as pool:
            runs = list(pool.map(_minimize_start, *zip(*args)))
    # first start wins ties, so the choice does not depend on scheduling
    best = min(range(len(runs)), key=lambda j: (runs[j].q_estimate, j))
    report = runs[best].as_dict()
    if rc.starts > 1:
        report["best_start"] = best
        report["start_q_estimates"] = [r.q_estimate for r in runs]
    return report, {"profile.csv": runs[best].profile}


def cmd_mountain_pass(rc):
    from .minimizer import minimize_quotient
    from .mountain_pass import level_window_check, ps_level_bounds, ray_scan, ray_trace

    cfg = rc.cfg()
    weighted = minimize_quotient(cfg, rc.grid)
    pure = minimize_quotient(C.DimensionConfig(cfg.N, 0.0, cfg.gamma), rc.grid)
    ray = ray_scan(weighted.profile, cfg)
    window = level_window_check(ray.e_sup, pure.q_estimate, weighted.q_estimate, cfg)
    caps = ps_level_bounds(ray.e_sup, cfg) if cfg.s < 4 else (None, None)
    report = {
        "N": cfg.N,
        "s": cfg.s,
        "gamma": cfg.gamma,
        "ray": ray.as_dict(),
        "q0_upper_bound": pure.q_estimate,
        "qs_upper_bound": weighted.q_estimate,
        "beta_star": window.beta_star,
        "beta": ray.e_sup,
        "window_admissible": window.admissible,
        "window_margin": window.margin,
        "ps_cap_weighted": caps[0],
        "ps_cap_sobolev": caps[1],
    }
    t, E = ray_trace(ray, cfg.N, cfg.s)
    return report, {"ray.csv": csv_text(("t", "E"), zip(t, E))}


# ----------------------------------------------------------------- sweep

SWEEP_COLUMNS = {
    "minimize": ("q_estimate", "el_residual", "iterations"),
    "bubble-gap": ("min_quotient", "gap", "gap_error", "epsilon"),
    "constants": ("critical_exponent", "half_space", "alpha_minus", "alpha_plus"),
}


def _sweep_point(task, N, s, gamma, grid, eps, a, delta):
    try:
        cfg = C.DimensionConfig(N, s, gamma)
        if task == "minimize":
            from .minimizer import minimize_quotient

            r = minimize_quotient(cfg, grid)
            values = (r.q_estimate, r.el_residual, r.iterations)
        elif task == "bubble-gap":
            from .testfuncs import strict_upper_bound_scan

            row = strict_upper_bound_scan(N, gamma, eps, a, delta).best
            values = (row.quotient, row.gap, row.gap_error, row.epsilon)
        else:
            roots = C.indicial_roots(cfg)
            values = (C.critical_exponent(cfg), cfg.gamma_h, roots.alpha_minus, roots.alpha_plus)
        return values, ""
    except (ValueError, ArithmeticError, AssertionError) as exc:
        return (None,) * len(SWEEP_COLUMNS[task]), f"{type(exc).__name__}: {exc}"


def run_sweep(rc, jobs=None):
    """Rows of the parameter product in input order, computed on ``jobs`` workers."""
    points = list(itertools.product(rc.dims, rc.s_values, rc.gammas))
    eps = tuple(sorted(rc.eps, reverse=True)) if rc.eps else None
    args = [(rc.task, N, s, g, rc.grid, eps, rc.a, rc.delta) for N, s, g in points]
    jobs = jobs or rc.jobs
    if jobs == 1:
        results = [_sweep_point(*a) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_point, *zip(*args)))
    return [(N, s, g) + values + (err,) for (N, s, g), (values, err) in zip(points, results)]


def cmd_sweep(rc):
    rows = run_sweep(rc)
    header = ("N", "s", "gamma") + SWEEP_COLUMNS[rc.task] + ("errors",)
    failures = sum(1 for r in rows if r[-1])
    report = {"task": rc.task, "points": len(rows), "failures": failures}
    return report, {"sweep.csv": csv_text(header, rows)}, failures == len(rows)


COMMANDS = {
    "constants": cmd_constants,
    "roots": cmd_roots,
    "hardy-seq": cmd_hardy_seq,
    "bubble": cmd_bubble,
    "minimize": cmd_minimize,
    "mountain-pass": cmd_mountain_pass,
    "sweep": cmd_sweep,
}


# ------------------------------------------------------------------ main


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dim", help="dimension N (comma list for sweep)")
    common.add_argument("--s", help="weight exponent s")
    common.add_argument("--gamma", help="Hardy parameter gamma")
    common.add_argument("--eps", help="comma-separated epsilon ladder")
    common.add_argument("--a", help="distance of the bubble centre from the boundary")
    common.add_argument("--delta", help="cutoff radius of the bubble")
    common.add_argument("--grid-points", dest="grid_points", help="log-grid size")
    common.add_argument("--t-min", dest="t_min", help="left end of the log grid")
    common.add_argument("--t-max", dest="t_max", help="right end of the log grid")
    common.add_argument("--out", help="directory for JSON/CSV artifacts")
    common.add_argument("--jobs", help=f"worker processes (default ${JOBS_ENV} or 1)")
    common.add_argument("--seed", help="seed for Monte-Carlo checks")
    common.add_argument("--config", help="key = value settings file")
    common.add_argument("--task", help="sweep task: " + ", ".join(SWEEP_TASKS))
    common.add_argument("--mc-samples", dest="mc_samples", help="Monte-Carlo sample count")
    common.add_argument("--starts", help="deterministic starts for minimize (best is reported)")

    parser = argparse.ArgumentParser(prog="rellich-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _emit(rc, command, report, artifacts):
    text = to_json(report) + "\n"
    if rc.out is not None:
        write_text(rc.out / f"{command.replace('-', '_')}.json", text)
        for name, content in artifacts.items():
            if isinstance(content, str):
                write_text(rc.out / name, content)
            else:
                write_profile_csv(rc.out / name, content)
    if command == "sweep" and rc.out is None:
        sys.stdout.write(artifacts["sweep.csv"])
    else:
        sys.stdout.write(text)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        rc = RunConfig(args.command, resolve_settings(args))
        result = COMMANDS[args.command](rc)
        all_failed = False
        if len(result) == 3:
            report, artifacts, all_failed = result
        else:
            report, artifacts = result
        _emit(rc, args.command, report, artifacts)
    except (ValidationError, DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ArithmeticError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_NUMERICAL if all_failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
