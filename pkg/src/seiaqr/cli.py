"""Command-line front end.

Exit status: 0 on success, 1 on a domain error (a JSON ``{"error", "message"}``
payload is printed to stdout), 2 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import calibration, equilibria, final_size, integrator, reproduction, sweep
from .errors import DegenerateRc, ModelError, NoEndemicEquilibrium
from .model import FIXTURES, ModelKind, default_kind, load_params, load_state


def _resolve(path: str, suffix: str = "") -> Path:
    """A path on disk, or the name of a bundled fixture (``india``, ``nanjing``)."""
    p = Path(path)
    if p.exists():
        return p
    bundled = FIXTURES / f"{p.stem}{suffix}.json"
    if bundled.exists():
        return bundled
    raise FileNotFoundError(f"no such file: {path}")


def _params(args):
    return load_params(_resolve(args.params))


def _initial(args, required=True):
    if args.initial is None:
        if required:
            raise argparse.ArgumentTypeError("--initial is required for this subcommand")
        return None
    return load_state(_resolve(args.initial, "_initial"))


def _population(args, params):
    """(s_tilde, n_total) for short-term analyses; both None means S~ = N."""
    if not params.is_short:
        return None, None
    n_total = args.n_total
    if n_total is None and args.initial is not None:
        n_total = _initial(args).N
    return args.s_tilde, n_total


def _rc_payload(args, with_gradient=False):
    params = _params(args)
    kind = default_kind(params)
    s_tilde, n_total = _population(args, params)
    value = reproduction.rc(params, kind, s_tilde, n_total)
    try:
        indices = reproduction.sensitivity_indices(params, kind, s_tilde, n_total).indices
    except DegenerateRc:
        indices = None
    out = {
        "mode": params.mode,
        "rc": value,
        "indices": indices,
        "critical_b": reproduction.critical_b(params, kind),
    }
    if with_gradient:
        out["gradient"] = reproduction.rc_gradient(params, kind, s_tilde, n_total)
    return out


def cmd_rc(args):
    return _rc_payload(args, with_gradient=True)


def cmd_sensitivity(args):
    return _rc_payload(args)


def cmd_critical_b(args):
    params = _params(args)
    s_tilde, n_total = _population(args, params)
    return {
        "mode": params.mode,
        "critical_b": reproduction.critical_b(params),
        "b": params.b,
        "rc": reproduction.rc(params, None, s_tilde, n_total),
    }


def _error(exc):
    return {"error": exc.code, "message": str(exc)}


def cmd_equilibria(args):
    params = _params(args)
    if params.is_short:
        s_tilde, n_total = _population(args, params)
        n = 1.0 if n_total is None else n_total
        return {
            "mode": "short",
            "rc": reproduction.rc_short(params, s_tilde, n_total),
            "disease_free": equilibria.disease_free_short(n, s_tilde).as_dict(),
            "endemic": _error(NoEndemicEquilibrium("the short-term model has no endemic equilibrium")),
        }
    out = {
        "mode": "long",
        "rc": reproduction.rc_long(params),
        "disease_free": equilibria.disease_free_long(params).as_dict(),
    }
    try:
        out["endemic"] = equilibria.endemic_long(params).as_dict()
    except NoEndemicEquilibrium as exc:
        out["endemic"] = _error(exc)
    if args.theta is not None and "error" not in out["endemic"]:
        b = equilibria.persistence_bounds(params, args.theta)
        out["persistence"] = {"theta": b.theta, "s_bar": b.s_bar, "s_breve": b.s_breve, "s_star": b.s_star}
    return out


def cmd_stability(args):
    params = _params(args)
    if params.is_short:
        s_tilde, n_total = _population(args, params)
        n = 1.0 if n_total is None else n_total
        point = equilibria.disease_free_short(n, s_tilde)
        report = equilibria.classify_stability(params, ModelKind.SHORT, point)
        a1, a2, a3 = equilibria.short_char_coeffs(params, s_tilde, n_total)
        return {
            "mode": "short",
            "rc": reproduction.rc_short(params, s_tilde, n_total),
            "disease_free": report.as_dict(),
            "cubic": {"a1": a1, "a2": a2, "a3": a3},
        }
    kind = ModelKind(args.kind or "long")
    out = {
        "mode": "long",
        "kind": kind.value,
        "rc": reproduction.rc_long(params),
        "disease_free": equilibria.classify_stability(params, kind, equilibria.disease_free_long(params)).as_dict(),
    }
    try:
        star = equilibria.endemic_long(params)
        out["endemic"] = equilibria.classify_stability(params, kind, star).as_dict()
    except NoEndemicEquilibrium as exc:
        out["endemic"] = _error(exc)
    return out


def _options(args):
    return integrator.IntegrationOptions(
        t_end=args.t_end,
        method=args.method,
        step=args.step,
        rel_tol=args.rel_tol,
        abs_tol=args.abs_tol,
        output_stride=args.stride,
    )


def cmd_simulate(args):
    params = _params(args)
    x0 = _initial(args)
    kind = ModelKind(args.kind) if args.kind else default_kind(params)
    traj = integrator.integrate(kind, params, x0, _options(args))
    if args.observed:
        daily = integrator.observed_series(traj, args.observed)
        if args.format == "csv":
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["day", "daily_new"])
            for k, v in enumerate(daily):
                w.writerow([k, f"{v:.10g}"])
            return buf.getvalue()
        return {"observation": integrator.ObsModel(args.observed).value, "daily_new": daily.tolist()}
    if args.format == "csv":
        buf = io.StringIO()
        traj.write_csv(buf)
        return buf.getvalue()
    return {name: col for name, col in zip(
        integrator.CSV_HEADER,
        [traj.times.tolist(), *traj.states.T.tolist(), traj.cum_symptomatic.tolist(), traj.cum_asymptomatic.tolist()],
    )}


def cmd_final_size(args):
    params = _params(args)
    x0 = _initial(args)
    return final_size.solve_final_size(params, x0, args.s_tilde).as_dict()


def cmd_fit(args):
    cfg = calibration.FitConfig.load(args.config)
    obs = calibration.load_series(args.data)
    return calibration.fit(cfg, obs).as_dict()


def cmd_sweep(args):
    params = _params(args)
    x0 = _initial(args, required=False)
    specs = [sweep.SweepSpec.parse(s) for s in args.sweep]
    rows = sweep.run_sweep(
        params, specs, args.quantity, x0=x0, kind=args.kind, compartment=args.compartment,
        t_end=args.t_end, step=args.step, workers=args.workers,
    )
    names = [s.name for s in specs]
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(names + ["value"])
        for row in rows:
            w.writerow([f"{v:.10g}" for v in row])
        return buf.getvalue()
    return {"quantity": args.quantity, "rows": [dict(zip(names + ["value"], row)) for row in rows]}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seiaqr", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="subcommand")
    sub.required = True

    def add(name, func, help, params=True):
        p = sub.add_parser(name, help=help)
        if params:
            p.add_argument("--params", required=True, help="parameter JSON file or bundled name (india, nanjing)")
        p.add_argument("-o", "--output", help="write here instead of stdout")
        p.set_defaults(func=func)
        return p

    def population(p):
        p.add_argument("--initial", help="initial-state JSON file or bundled name")
        p.add_argument("--n-total", type=float, help="short-term population N")
        p.add_argument("--s-tilde", type=float, help="susceptibles at the disease-free state (default N)")

    def integration(p, t_end, stride):
        p.add_argument("--kind", choices=[k.value for k in ModelKind])
        p.add_argument("--t-end", type=float, default=t_end)
        p.add_argument("--method", choices=[m.value for m in integrator.Method], default="rk4")
        p.add_argument("--step", type=float, default=0.05)
        p.add_argument("--rel-tol", type=float, default=1e-8)
        p.add_argument("--abs-tol", type=float, default=1e-10)
        p.add_argument("--stride", type=float, default=stride)

    for name, func, text in (
        ("rc", cmd_rc, "control reproduction number and its gradient"),
        ("sensitivity", cmd_sensitivity, "normalized sensitivity indices of R_c"),
        ("critical-b", cmd_critical_b, "b at which dR_c/d(1-p) changes sign"),
    ):
        population(add(name, func, text))

    p = add("equilibria", cmd_equilibria, "disease-free and endemic equilibria")
    population(p)
    p.add_argument("--theta", type=float, help="also report persistence bounds for this theta")

    p = add("stability", cmd_stability, "eigenvalue classification of the equilibria")
    population(p)
    p.add_argument("--kind", choices=["long", "limiting"])

    p = add("simulate", cmd_simulate, "integrate a model and emit the trajectory")
    p.add_argument("--initial", required=True)
    integration(p, 100.0, 1.0)
    p.add_argument("--observed", choices=[m.value for m in integrator.ObsModel],
                   help="emit daily counts of this flow instead of the trajectory")
    p.add_argument("--format", choices=["json", "csv"], default="csv")

    p = add("final-size", cmd_final_size, "final size of the short-term model")
    p.add_argument("--initial", required=True)
    p.add_argument("--s-tilde", type=float)

    p = add("fit", cmd_fit, "least-squares calibration against a case series", params=False)
    p.add_argument("--config", required=True, help="fit configuration JSON")
    p.add_argument("--data", required=True, help="CSV with date,daily_new[,cumulative]")

    p = add("sweep", cmd_sweep, "evaluate a derived quantity on a parameter grid")
    p.add_argument("--initial")
    p.add_argument("--sweep", action="append", required=True, metavar="NAME:LO:HI:STEPS")
    p.add_argument("--quantity", choices=sweep.QUANTITIES, default="rc")
    p.add_argument("--compartment", choices=["E", "I", "A", "Q"], default="A")
    p.add_argument("--kind", choices=[k.value for k in ModelKind])
    p.add_argument("--t-end", type=float, default=600.0)
    p.add_argument("--step", type=float, default=0.05)
    p.add_argument("--workers", type=int)
    p.add_argument("--format", choices=["json", "csv"], default="csv")
    return parser


def _emit(payload, output):
    text = payload if isinstance(payload, str) else json.dumps(payload, indent=2) + "\n"
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "sweep" and len(args.sweep) > 2:
        parser.print_usage(sys.stderr)
        sys.stderr.write("seiaqr sweep: error: at most two --sweep specs\n")
        return 2
    try:
        payload = args.func(args)
    except argparse.ArgumentTypeError as exc:
        sys.stderr.write(f"seiaqr {args.command}: error: {exc}\n")
        return 2
    except ModelError as exc:
        _emit(_error(exc), None)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        _emit({"error": "IOError" if isinstance(exc, OSError) else "ParseError", "message": str(exc)}, None)
        return 1
    _emit(payload, args.output)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
