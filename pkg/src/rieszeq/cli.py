"""Command-line front end.

Exit codes: 0 ok, 1 usage or invalid parameters, 2 no closed form known,
3 equilibrium measure does not exist, 4 a verification failed.
"""

import argparse
import csv
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import analytic, discrete, potentials
from .errors import RieszError
from .kernels import ExternalField, RieszParams

OUTPUT_ENV = "RIESZEQ_OUTPUT_DIR"

EXIT_OK, EXIT_USAGE, EXIT_UNKNOWN, EXIT_NONEXISTENT, EXIT_FAIL = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


def _add_model_args(p):
    p.add_argument("--d", type=int, help="dimension")
    p.add_argument("--s", type=float, help="Riesz exponent (s > -2)")
    p.add_argument("--alpha", type=float, help="field power")
    p.add_argument("--gamma", type=float, default=1.0, help="field strength")
    p.add_argument("--p", type=float, default=2.0, help="norm index of the field")


def build_parser():
    parser = argparse.ArgumentParser(prog="rieszeq", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with option values (flags override it)")
    common.add_argument("--out", help=f"output directory (default: ${OUTPUT_ENV})")
    common.add_argument("--threads", type=int, default=1, help="worker threads for pair sums")
    common.add_argument("--seed", type=int, default=0, help="random seed")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="closed-form equilibrium measure")
    _add_model_args(p)

    p = sub.add_parser("frostman", parents=[common], help="verify the Frostman conditions")
    _add_model_args(p)
    p.add_argument("--radius", type=float, help="override the support radius")
    p.add_argument("--radius-scale", type=float, default=1.0, help="multiply the radius")
    p.add_argument("--grid-n", type=int, default=400)
    p.add_argument("--lam-max", type=float, default=3.0)
    p.add_argument("--tol", type=float, default=potentials.FROSTMAN_TOL)

    p = sub.add_parser("minimize", parents=[common], help="discrete energy minimization")
    _add_model_args(p)
    p.add_argument("--n", type=int, default=1000, help="number of points")
    p.add_argument("--starts", type=int, default=4)
    p.add_argument("--max-iter", type=int, default=2000)
    p.add_argument("--gtol", type=float, default=1e-5)
    p.add_argument("--ftol", type=float, default=1e-10,
                   help="relative energy stagnation tolerance (0 disables)")
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--shell-halfwidth", type=float, default=0.05)

    p = sub.add_parser("sample", parents=[common], help="sample the closed-form measure")
    _add_model_args(p)
    p.add_argument("--n", type=int, default=1000)

    p = sub.add_parser("identity", parents=[common], help="s = d - 1 integral identity")
    p.add_argument("--d", type=int, nargs="+", default=list(range(2, 11)))
    p.add_argument("--lams", type=float, nargs="+",
                   default=[round(0.1 * k, 10) for k in range(11)])
    p.add_argument("--tol", type=float, default=1e-6)
    return parser


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            values = json.load(fh)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        sub.set_defaults(**{k.replace("-", "_"): v for k, v in values.items()
                            if k.replace("-", "_") in known})
        args = parser.parse_args(argv)
    return args


def _model(args):
    for name in ("d", "s", "alpha"):
        if getattr(args, name, None) is None:
            raise UsageError(f"--{name} is required")
    return RieszParams(args.d, args.s), ExternalField(args.gamma, args.alpha, args.p)


def _outdir(args):
    target = args.out or os.environ.get(OUTPUT_ENV)
    if not target:
        return None
    path = Path(target)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _emit(obj):
    print(json.dumps(obj, indent=2, default=float))


def _measure_exit(measure):
    if measure.variant == analytic.UNKNOWN:
        return EXIT_UNKNOWN
    if measure.variant == analytic.NON_EXISTENT:
        return EXIT_NONEXISTENT
    return EXIT_OK


def cmd_solve(args):
    params, fld = _model(args)
    measure = analytic.solve_equilibrium(params, fld)
    _emit(measure.to_dict())
    return _measure_exit(measure)


def _fmt(value):
    return "" if value is None else repr(float(value))


def cmd_frostman(args):
    params, fld = _model(args)
    measure = analytic.solve_equilibrium(params, fld)
    code = _measure_exit(measure)
    if code != EXIT_OK:
        _emit(measure.to_dict())
        return code
    if args.grid_n < 1:
        raise UsageError("--grid-n must be >= 1")
    if measure.R is not None:
        R = args.radius if args.radius is not None else measure.R
        measure = replace(measure, R=R * args.radius_scale)
    grid = potentials.default_grid(args.grid_n, args.lam_max)
    report = potentials.frostman_verify(measure, params, fld, grid, args.tol)
    out = _outdir(args)
    if out is not None:
        with open(out / "frostman.csv", "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["lambda", "phi", "phi_prime", "method"])
            for e in report.evaluations:
                writer.writerow([_fmt(e.lam), _fmt(e.value), _fmt(e.derivative), e.method])
        (out / "frostman.json").write_text(report.to_json(indent=2) + "\n", encoding="utf-8")
    _emit({"measure": measure.to_dict(), "report": report.to_dict()})
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_minimize(args):
    params, fld = _model(args)
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    if args.starts < 1:
        raise UsageError("--starts must be >= 1")
    opts = discrete.MinimizeOptions(max_iterations=args.max_iter, gradient_tolerance=args.gtol,
                                    energy_tolerance=args.ftol, threads=args.threads)
    result = discrete.multi_start(args.starts, args.seed, args.n, params, fld, opts)
    theory = discrete.analytic_radius(params, fld)
    stats = discrete.radial_stats(result.best, args.bins, theory, args.shell_halfwidth)
    summary = {"alpha": fld.alpha, "theoretical_R": theory,
               "empirical_R": stats.support_radius,
               "best_energy": result.best.meta["energy"], "energies": result.energies,
               "energy_spread": result.spread, "iterations": result.best.meta["iterations"],
               "stalled": result.best.meta["stalled"], "stats": stats.to_dict()}
    out = _outdir(args)
    if out is not None:
        result.best.to_csv(out / "points.csv")
        (out / "histogram.csv").write_text(stats.histogram_csv(), encoding="utf-8")
        (out / "radial_stats.json").write_text(stats.to_json(indent=2) + "\n", encoding="utf-8")
        (out / "summary.csv").write_text(
            "alpha,theoretical_R,empirical_R\n"
            f"{_fmt(fld.alpha)},{_fmt(theory)},{_fmt(stats.support_radius)}\n", encoding="utf-8")
        if params.d >= 2:
            # the last d-1 coordinates, for scatter plots of non-Euclidean fields
            proj = discrete.Configuration(result.best.points[:, 1:])
            text = proj.to_csv().split("\n", 1)[1]
            header = ",".join(f"x{i + 2}" for i in range(params.d - 1))
            (out / "projected.csv").write_text(header + "\n" + text, encoding="utf-8")
        (out / "configuration.json").write_text(result.best.to_json() + "\n", encoding="utf-8")
    _emit(summary)
    return EXIT_OK


def cmd_sample(args):
    params, fld = _model(args)
    if args.n < 0:
        raise UsageError("--n must be >= 0")
    measure = analytic.solve_equilibrium(params, fld)
    code = _measure_exit(measure)
    if code != EXIT_OK:
        _emit(measure.to_dict())
        return code
    pts = analytic.sample(measure, params.d, args.n, args.seed)
    text = discrete.Configuration(pts).to_csv() if args.n else "".join(
        ",".join(f"x{i + 1}" for i in range(params.d)) + "\n")
    out = _outdir(args)
    if out is not None:
        (out / "sample.csv").write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_identity(args):
    if any(d < 2 or d > 12 for d in args.d):
        raise UsageError("--d values must lie in 2..12")
    if any(not 0 <= lam <= 1 for lam in args.lams):
        raise UsageError("--lams values must lie in [0, 1]")
    rows = ["d,lambda,residual"]
    worst = 0.0
    for d in args.d:
        for lam in args.lams:
            res = potentials.sd1_identity_residual(d, lam)
            worst = max(worst, res)
            rows.append(f"{d},{lam!r},{res!r}")
    text = "\n".join(rows) + "\n"
    out = _outdir(args)
    if out is not None:
        (out / "identity.csv").write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK if worst < args.tol else EXIT_FAIL


COMMANDS = {"solve": cmd_solve, "frostman": cmd_frostman, "minimize": cmd_minimize,
            "sample": cmd_sample, "identity": cmd_identity}


def main(argv=None):
    try:
        args = parse_args(sys.argv[1:] if argv is None else argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except (UsageError, RieszError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
