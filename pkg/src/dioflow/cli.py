"""Command line driver: ``dioflow exponent | orbit | nondiv | goodfit | maps-list``.

Each experiment writes a report whose first line is a timestamp comment and
whose remainder is JSON (config, version, metadata, results), plus an
optional CSV table. Everything after the first line depends only on the
configuration and the seed.

Exit codes: 0 success, 2 configuration error, 3 numeric guard tripped,
4 the experiment falsified its own preconditions.
"""

import argparse
import csv
from datetime import datetime, timezone
from fractions import Fraction
import io
import json
import math
import sys

import numpy as np

from . import __version__
from ._accel import JIT_ENABLED, set_workers
from .exponents import best_approx_records, dirichlet_check, fit_omega, fit_omega_mult
from .flow import ComplexPoint, FlowTime, NumericGuardError
from .goodness import DEFAULT_EPS_GRID, Ball, PreconditionError, good_fit
from .maps import BUILTIN_MAPS, builtin_map, check_li_complex, check_li_real, resolve_map
from .nondivergence import (
    borel_cantelli_sum,
    check_213,
    check_214,
    default_family,
    theorem26_experiment,
)
from .reduction import converse_exponent, witness_search

EXIT_OK, EXIT_CONFIG, EXIT_GUARD, EXIT_FALSIFIED = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


class Falsified(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# parsing


def parse_complex(text):
    text = str(text).strip().replace("i", "j")
    try:
        return complex(text)
    except ValueError:
        raise ConfigError(f"not a complex number: {text!r}") from None


def parse_point(text):
    """Comma-separated coordinates; ``a/b`` entries are exact real rationals."""
    xs, ys = [], []
    for part in str(text).split(","):
        part = part.strip()
        if "/" in part:
            try:
                xs.append(Fraction(part))
            except ValueError:
                raise ConfigError(f"bad rational coordinate {part!r}") from None
            ys.append(0)
        else:
            c = parse_complex(part)
            xs.append(c.real)
            ys.append(c.imag)
    return ComplexPoint(tuple(xs), tuple(ys))


def parse_floats(text):
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad number list {text!r}") from None


def parse_times(values):
    out = []
    for v in values:
        comps = parse_floats(v)
        try:
            out.append(FlowTime(tuple(comps)))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    return out


def _jsonable(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else str(obj)
    if isinstance(obj, (np.floating,)):
        return _jsonable(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    return obj


# ---------------------------------------------------------------------------
# output


def emit(args, command, results, rows=None, header=None, metadata=None):
    body = {
        "command": command,
        "version": __version__,
        "config": {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out", "csv", "workers")},
        "metadata": {"jit": JIT_ENABLED, **(metadata or {})},
        "results": results,
    }
    stamp = f"# generated {datetime.now(timezone.utc).isoformat()}\n"
    text = stamp + json.dumps(_jsonable(body), indent=1, sort_keys=True) + "\n"
    table = None
    if rows is not None:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(_jsonable(rows))
        table = buf.getvalue()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if table is not None:
        csv_path = args.csv or (args.out + ".csv" if args.out else None)
        if csv_path:
            with open(csv_path, "w") as fh:
                fh.write(table)


def _load_map(args):
    try:
        f = resolve_map(args.map)
    except (OSError, KeyError, ValueError) as exc:
        raise ConfigError(f"cannot load map {args.map!r}: {exc}") from None
    if args.n is not None and args.n != f.n:
        raise ConfigError(f"map {args.map!r} has n = {f.n} but --n {args.n} was given")
    return f


def _require_seed(args):
    if args.seed is None:
        raise ConfigError("--seed is required for sampled experiments")


def _ball(args, default_center, default_radius):
    radius = args.radius if args.radius is not None else default_radius
    if not radius > 0:
        raise ConfigError("--radius must be positive")
    return Ball(parse_complex(args.center if args.center is not None else default_center), radius)


def _points(args):
    """Target points z in C^n: either --point, or f(z) for parameters z."""
    if args.point:
        return [("point", parse_point(args.point))]
    f = _load_map(args)
    if args.z:
        params = [parse_complex(v) for v in args.z]
    else:
        _require_seed(args)
        ball = _ball(args, "0", 1.0)
        params = list(Ball.as_complex(ball.sample(args.points, args.seed)))
    return [(f"{p.real!r}{p.imag:+}j", ComplexPoint.from_complex(f(np.array([p]))[0])) for p in params]


# ---------------------------------------------------------------------------
# commands


def cmd_exponent(args):
    if args.h_max < 2:
        raise ConfigError("--h-max must be >= 2")
    results, rows = [], []
    for label, z in _points(args):
        records = best_approx_records(z, args.h_max)
        entry = {"label": label, "records": len(records)}
        for name, fit in (("omega", fit_omega), ("omega_mult", fit_omega_mult)):
            try:
                res = fit(records, args.tail)
                entry[name] = res.slope
                entry[name + "_fit"] = {"intercept": res.intercept, "records_used": res.records_used,
                                        "tail": res.tail, "regressor": res.regressor}
            except ValueError as exc:
                entry[name] = None
                entry[name + "_error"] = str(exc)
        c, _ = dirichlet_check(z, args.h_max)
        entry["dirichlet_c"] = c
        results.append(entry)
        for r in records:
            rows.append([label, r.height, " ".join(map(str, r.q)), r.p, r.error, r.pi_plus])
        rows.append([label, "summary", "", "", entry["omega"], entry["omega_mult"]])
    medians = {}
    for key in ("omega", "omega_mult"):
        vals = [e[key] for e in results if e[key] is not None]
        medians[key] = float(np.median(vals)) if vals else None
    emit(args, "exponent", {"points": results, "median": medians}, rows,
         ["point", "height", "q", "p", "error", "pi_plus"],
         {"protocol": "least-squares slope of -ln(error) over the last tail fraction of the records",
          "precision": "double, exact re-evaluation below 1e-10"})
    return EXIT_OK


def cmd_orbit(args):
    if not args.gamma > 0:
        raise ConfigError("--gamma must be positive")
    if args.t_max < 0:
        raise ConfigError("--t-max must be >= 0")
    results, rows = [], []
    for label, z in _points(args):
        if args.n is not None and z.n != args.n:
            raise ConfigError(f"point has n = {z.n} but --n {args.n} was given")
        witnesses = witness_search(z, args.gamma, args.t_max, args.norm)
        qualifying = [w for w in witnesses if w.qualifies]
        results.append({"label": label, "times": len(witnesses), "qualifying": len(qualifying),
                        "converse_exponents": [converse_exponent(z, w) for w in qualifying]})
        for w in witnesses:
            rows.append([label, " ".join(f"{c:g}" for c in w.t.components), w.t.total, w.delta,
                         w.threshold, int(w.qualifies), w.p, " ".join(map(str, w.q))])
    emit(args, "orbit", {"points": results}, rows,
         ["point", "t", "total", "delta", "threshold", "qualifies", "p", "q"],
         {"precision": "double up to total t 80, 128-bit above, refused beyond 200"})
    return EXIT_OK


def cmd_nondiv(args):
    _require_seed(args)
    f = _load_map(args)
    ball = _ball(args, "0.5+0.5j", 0.1)
    times = parse_times(args.t or ["1," * (f.n - 1) + "1"])
    for t in times:
        if t.n != f.n:
            raise ConfigError(f"flow time {t.components} has {t.n} components, map has n = {f.n}")
    family = default_family(f.n, height=args.height)
    eps_grid = parse_floats(args.eps_grid) if args.eps_grid else None
    results, rows = {"configurations": []}, []
    falsified = []
    for t in times:
        sweep = check_213(f, ball.dilate(3 ** (f.n + 1)), family, [t], samples=args.fit_samples,
                          seed=args.seed)
        sup = check_214(f, ball, family, [t], samples=args.fit_samples, seed=args.seed)
        vacuous = math.isnan(sweep.C)
        C, alpha = (1.0, 1.0) if vacuous else (sweep.C, sweep.alpha)
        try:
            rep = theorem26_experiment(f, ball, t, C, alpha, sup.rho, c=args.c, eps_grid=eps_grid,
                                       samples=args.samples, seed=args.seed, family_size=len(family),
                                       truncation_height=args.height)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not rep.within_bound:
            falsified.append(t.components)
        results["configurations"].append({
            "t": t.components,
            "goodness": {"C": sweep.C, "alpha": sweep.alpha, "vacuous": vacuous,
                         "degenerate_constant": sweep.degenerate_constant,
                         "worst_member": sweep.worst_member, "symbolic_checked": sweep.symbolic_checked,
                         "symbolic_ok": sweep.symbolic_ok, "samples": sweep.samples},
            "sup_bound": {"rho": sup.rho, "argmin": sup.argmin, "rho_by_rank": sup.rho_by_rank,
                          "rho1": sup.rho1, "rho2": sup.rho2, "consistent": sup.consistent()},
            "measures": {"eps": rep.eps_grid, "measured": rep.measured_measures, "bound": rep.bound_values,
                         "rho_used": rep.rho_used, "C_used": rep.C_used, "alpha_used": rep.alpha_used,
                         "c_used": rep.c_used, "slope": rep.slope, "within_bound": rep.within_bound,
                         "slope_ok": rep.slope_ok},
        })
        for e, m, b in zip(rep.eps_grid, rep.measured_measures, rep.bound_values):
            rows.append([" ".join(f"{c:g}" for c in t.components), e, m, b])
    results["family"] = {"size": len(family), "truncation_height": args.height}
    results["ball"] = {"center": ball.center, "radius": ball.radius,
                       "dilated_radius": ball.radius * 3 ** (f.n + 1)}
    if args.gamma is not None:
        bc = borel_cantelli_sum(f, ball, args.gamma, args.t_max, samples=args.samples, seed=args.seed)
        results["borel_cantelli"] = {"gamma": bc.gamma, "shell_sums": bc.shell_sums,
                                     "partial_sums": bc.partial_sums, "shell_ratio_3": bc.shell_ratio(3)}
    emit(args, "nondiv", results, rows, ["t", "eps", "measured", "bound"],
         {"constants": "(C, alpha) fitted on sampled covolume functions, not derived",
          "truncation_height": args.height, "delta_norm": "euclidean"})
    if falsified:
        raise Falsified(f"measured measure exceeds the bound at t = {falsified}")
    return EXIT_OK


GOODFIT_FUNCTIONS = {
    "x-on-disc": (lambda x, y: x, Ball((0.0, 0.0), 1.0)),
    "x2-on-square": (lambda x, y: x * x, Ball((0.0, 0.0), 1.0, "sup")),
    "radial-on-disc": (lambda x, y: np.hypot(x, y), Ball((0.0, 0.0), 1.0)),
    "constant": (lambda x, y: np.full_like(x, 3.0), Ball((0.0, 0.0), 1.0)),
    "zero": (lambda x, y: np.zeros_like(x), Ball((0.0, 0.0), 1.0)),
}


def cmd_goodfit(args):
    _require_seed(args)
    names = args.function or ["x-on-disc", "x2-on-square", "constant"]
    eps = parse_floats(args.eps_grid) if args.eps_grid else list(DEFAULT_EPS_GRID)
    results, rows = [], []
    for name in names:
        if name not in GOODFIT_FUNCTIONS:
            raise ConfigError(f"unknown function {name!r}; known: {', '.join(GOODFIT_FUNCTIONS)}")
        func, ball = GOODFIT_FUNCTIONS[name]
        try:
            rep = good_fit(func, ball, args.samples, eps, args.seed)
            dbl = good_fit(func, ball, 2 * args.samples, eps, args.seed)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        results.append({"function": name, "C": rep.C, "alpha": rep.alpha, "degenerate": rep.degenerate,
                        "sup": rep.sup_estimate, "violations": rep.violation_count,
                        "alpha_doubled_samples": dbl.alpha, "samples": rep.sample_count})
        for e, r in zip(rep.eps_grid, rep.measured_ratios):
            rows.append([name, e, r])
    emit(args, "goodfit", {"functions": results}, rows, ["function", "eps", "ratio"],
         {"sampling": "scrambled Halton, polar map on discs"})
    return EXIT_OK


def cmd_maps_list(args):
    rows = []
    for name in BUILTIN_MAPS:
        f = builtin_map(name)
        rows.append([name, f.n, int(f.analytic), int(check_li_real(f)), int(check_li_complex(f))])
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["name", "n", "analytic", "independent_over_R", "independent_over_C"])
    out.writerows(rows)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file whose keys override the flags")
    common.add_argument("--out", help="report path (default: stdout)")
    common.add_argument("--csv", help="CSV path (default: <out>.csv when --out is given)")
    common.add_argument("--seed", type=int, help="sampling seed (required for sampled experiments)")
    common.add_argument("--workers", type=int, default=0, help="threads for parallel kernels")

    target = argparse.ArgumentParser(add_help=False)
    target.add_argument("--map", default="mahler-2", help="builtin map name or map file")
    target.add_argument("--n", type=int, help="expected dimension (checked against the map)")
    target.add_argument("--point", help="explicit point of C^n, comma separated; a/b is an exact rational")
    target.add_argument("--z", action="append", help="parameter value z (repeatable)")
    target.add_argument("--points", type=int, default=50, help="sampled parameters when no --z/--point")
    target.add_argument("--center", help="center of the parameter disc")
    target.add_argument("--radius", type=float, help="radius of the parameter disc")

    parser = argparse.ArgumentParser(prog="dioflow", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exponent", parents=[common, target], help="best approximations and exponent fits")
    p.add_argument("--h-max", type=int, default=2000)
    p.add_argument("--tail", type=float, default=0.5)
    p.set_defaults(func=cmd_exponent)

    p = sub.add_parser("orbit", parents=[common, target], help="shortest vectors along g_t u_z Lambda")
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--t-max", type=int, default=5)
    p.add_argument("--norm", choices=("sup", "euclidean"), default="sup")
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("nondiv", parents=[common, target], help="covolume conditions and short-vector measures")
    p.add_argument("--t", action="append", help="flow time, comma separated (repeatable)")
    p.add_argument("--height", type=int, default=1, help="subgroup family truncation height")
    p.add_argument("--samples", type=int, default=20_000)
    p.add_argument("--fit-samples", type=int, default=2048)
    p.add_argument("--eps-grid")
    p.add_argument("--c", type=float, default=1.0, help="constant in front of the bound")
    p.add_argument("--gamma", type=float, help="also sum short-vector measures with this rate")
    p.add_argument("--t-max", type=int, default=15)
    p.set_defaults(func=cmd_nondiv)

    p = sub.add_parser("goodfit", parents=[common], help="fit (C, alpha) for builtin functions")
    p.add_argument("--function", action="append")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--eps-grid")
    p.set_defaults(func=cmd_goodfit)

    p = sub.add_parser("maps-list", help="builtin maps and their independence flags")
    p.set_defaults(func=cmd_maps_list, config=None, workers=0)
    return parser


def _apply_config(args, parser):
    if not args.config:
        return
    try:
        with open(args.config) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {args.config!r}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    for key, value in data.items():
        dest = key.replace("-", "_")
        if dest in ("func", "command", "config") or not hasattr(args, dest):
            raise ConfigError(f"unknown config key {key!r} for command {args.command!r}")
        setattr(args, dest, value)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args, parser)
        set_workers(args.workers)
        return args.func(args)
    except ConfigError as exc:
        print(f"dioflow: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericGuardError as exc:
        print(f"dioflow: numeric guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (Falsified, PreconditionError) as exc:
        print(f"dioflow: preconditions falsified: {exc}", file=sys.stderr)
        return EXIT_FALSIFIED


if __name__ == "__main__":
    sys.exit(main())
