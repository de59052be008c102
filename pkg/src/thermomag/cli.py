"""Command-line front end: ``thermomag {point,figure1,figure2,verify,simulate}``.

Exit codes: 0 success, 1 usage, 2 verification failure, 3 I/O.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from contextlib import contextmanager
from dataclasses import replace

import numpy as np

from . import __version__
from .config import ConfigError, load_config
from .estimation_sim import run_experiment
from .fisher_classical import FisherPathologyError, MeasurementAxis, fisher_report, qubit_closed_form
from .fisher_quantum import UnidentifiableError, optimal_angle
from .spin_algebra import SpinLength
from .sweeps import FIG1_COLUMNS, FIG2_COLUMNS, FIG2_EXTRA, GridSpec, figure1_rows, figure2_rows
from .thermal_state import ParamPoint, thermal_state
from .verification import run_verification

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("thermomag")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(x) -> str:
    """12 significant digits; integers stay integers."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def _json_value(x):
    if isinstance(x, (bool, np.bool_, int, np.integer, str)) or x is None:
        return x.item() if isinstance(x, np.generic) else x
    if isinstance(x, (list, tuple)):
        return [_json_value(v) for v in x]
    x = float(x)
    return float(f"{x:.12g}") if np.isfinite(x) else None


@contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
        return
    try:
        fh = open(path, "w", newline="")
    except OSError as exc:
        raise OSError(f"cannot open {path}: {exc.strerror}") from exc
    with fh:
        yield fh


def _angle(value, degrees):
    return np.deg2rad(value) if degrees else value


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _twoS_list(text):
    try:
        vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty twoS list")
    return vals


def write_table(fh, rows, columns, fmt_name, notes=()):
    """CSV with '#' note lines before the header, or JSON lines."""
    if fmt_name == "json":
        for row in rows:
            fh.write(json.dumps({c: _json_value(row[c]) for c in columns}) + "\n")
        return
    for note in notes:
        fh.write(f"# {note}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(row[c]) for c in columns])


def read_csv_table(text):
    """Parse a table written by :func:`write_table` (CSV flavour) into float columns."""
    lines = [ln for ln in io.StringIO(text).read().splitlines() if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    return [dict(zip(header, map(float, rec))) for rec in reader]


def _columns(requested, available, default):
    if requested is None:
        return default
    cols = [c.strip() for c in requested.split(",") if c.strip()]
    unknown = [c for c in cols if c not in available]
    if unknown:
        raise UsageError(f"unknown column(s) {unknown}; available: {', '.join(available)}")
    return tuple(cols)


def _grid(args, prefix, degrees=False):
    lo, hi = getattr(args, f"{prefix}_min"), getattr(args, f"{prefix}_max")
    if degrees:
        lo, hi = np.deg2rad(lo), np.deg2rad(hi)
    try:
        return GridSpec(lo, hi, getattr(args, f"{prefix}_count"), getattr(args, f"{prefix}_spacing", "linear"))
    except ValueError as exc:
        raise UsageError(f"--{prefix}: {exc}") from None


def cmd_point(args):
    d = args.degrees
    try:
        s = SpinLength(args.twoS)
        pt = ParamPoint(_angle(args.theta, d), args.delta, _angle(args.thetadot, d), args.deltadot)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    st = thermal_state(s, pt.delta)
    if args.phi == "opt":
        if not pt.identifiable:
            raise UsageError("--phi opt needs a nonzero --thetadot or --deltadot")
        phi = optimal_angle(pt)
    else:
        try:
            phi = _angle(float(args.phi), d)
        except ValueError:
            raise UsageError(f"--phi expects a number or 'opt', got {args.phi!r}") from None
    rep = fisher_report(st, pt, MeasurementAxis(phi, _angle(args.gamma, d)))
    out = {"twoS": s.twoS, "phi": phi, **rep.as_dict()}
    if s.twoS == 1 and args.gamma == 0:
        out["qubit_closed_form"] = qubit_closed_form(pt, phi)
    if args.format == "json":
        print(json.dumps({k: _json_value(v) for k, v in out.items()}))
    else:
        for k, v in out.items():
            print(f"{k} = {fmt(v)}")
    return EXIT_OK


def cmd_figure1(args):
    grid = _grid(args, "delta")
    rows = figure1_rows(args.twoS, grid, jobs=args.jobs)
    notes = (
        "delta = Zeeman gap / k_B T (dimensionless); twoS = 2S",
        "hC_norm = h_C / [S(S+1)] (equals 1/3 at delta=0); hQ_norm = h_Q / (2S) (tends to 1 at large delta)",
    )
    with _output(args.out) as fh:
        write_table(fh, rows, FIG1_COLUMNS, args.format, notes)
    return EXIT_OK


def cmd_figure2(args):
    dgrid = _grid(args, "delta")
    pgrid = _grid(args, "phi", degrees=args.degrees)
    cols = _columns(args.columns, FIG2_COLUMNS + FIG2_EXTRA, FIG2_COLUMNS)
    try:
        rows = figure2_rows(args.twoS, dgrid, pgrid, rate=args.rate, jobs=args.jobs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    notes = (
        f"twoS = {args.twoS}; theta_dot = delta_dot = {fmt(args.rate)} per unit lambda",
        "delta dimensionless; phi = offset of the measured axis from the field axis, radians",
        "A_tt_norm = A_tt / (2S); A_dd_norm = A_dd / [S(S+1)/3]; F_over_H = classical / quantum Fisher information",
        "unnormalized A_tt, A_dd, A_dt, F, H, P are per lambda^2",
    )
    with _output(args.out) as fh:
        write_table(fh, rows, cols, args.format, notes)
    return EXIT_OK


def cmd_verify(args):
    report = run_verification(trials=args.trials, seed=args.seed, max_twoS=args.max_twoS)
    print(f"verify: {report.trials} trials, seed {report.seed}")
    for c in report.checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"  {status} {c.name:22s} worst={c.worst:.3e} tol={c.tolerance:.0e}")
    if report.passed:
        return EXIT_OK
    for c in report.checks:
        if not c.passed:
            print(json.dumps({"check": c.name, "worst": _json_value(c.worst), "instance": c.worst_instance}))
    return EXIT_VERIFY


def cmd_simulate(args):
    configs = []
    for path in args.config:
        try:
            cfg = load_config(path)
        except ConfigError as exc:
            raise UsageError(str(exc)) from None
        if args.jobs is not None:
            cfg = replace(cfg, jobs=args.jobs)
        configs.append(cfg)
    with _output(args.out) as fh:
        for cfg in configs:
            res = run_experiment(cfg)
            fh.write(json.dumps({k: _json_value(v) for k, v in res.as_dict().items()}) + "\n")
            fh.flush()
    return EXIT_OK


def build_parser():
    p = _Parser(prog="thermomag", description="Fisher information of a thermal spin in a magnetic field.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    pt = sub.add_parser("point", help="Fisher quantities at one parameter point")
    pt.add_argument("--twoS", type=int, required=True, help="2S (1 for a qubit)")
    pt.add_argument("--delta", type=float, required=True, help="Zeeman gap / k_B T")
    pt.add_argument("--theta", type=float, default=0.0, help="field polar angle")
    pt.add_argument("--thetadot", type=float, default=0.0, help="d theta / d lambda")
    pt.add_argument("--deltadot", type=float, default=0.0, help="d delta / d lambda")
    pt.add_argument("--phi", default="opt", help="axis offset from the field, or 'opt'")
    pt.add_argument("--gamma", type=float, default=0.0, help="out-of-plane azimuth of the axis")
    pt.add_argument("--degrees", action="store_true", help="angles and theta_dot in degrees")
    pt.add_argument("--format", choices=("text", "json"), default="text")
    pt.set_defaults(func=cmd_point)

    def add_grid(sp, prefix, lo, hi, count, spacing):
        sp.add_argument(f"--{prefix}-min", type=float, default=lo)
        sp.add_argument(f"--{prefix}-max", type=float, default=hi)
        sp.add_argument(f"--{prefix}-count", type=int, default=count)
        if spacing is not None:
            sp.add_argument(f"--{prefix}-spacing", choices=("linear", "log"), default=spacing)

    def add_output(sp):
        sp.add_argument("--out", default=None, help="output path (default stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--jobs", type=_positive_int, default=1, help="worker processes")

    f1 = sub.add_parser("figure1", help="h_C and h_Q versus delta")
    f1.add_argument("--twoS", type=_twoS_list, default=[1, 2, 10], help="comma-separated 2S values")
    add_grid(f1, "delta", 0.0, 10.0, 101, "linear")
    add_output(f1)
    f1.set_defaults(func=cmd_figure1)

    f2 = sub.add_parser("figure2", help="CFI decomposition over (delta, phi)")
    f2.add_argument("--twoS", type=int, default=2)
    add_grid(f2, "delta", 0.0, 10.0, 40, "linear")
    add_grid(f2, "phi", 0.0, float(np.pi), 40, None)
    f2.add_argument("--rate", type=float, default=1.0, help="theta_dot = delta_dot")
    f2.add_argument("--columns", default=None, help="comma-separated subset of columns")
    f2.add_argument("--degrees", action="store_true", help="phi grid bounds in degrees")
    add_output(f2)
    f2.set_defaults(func=cmd_figure2)

    v = sub.add_parser("verify", help="compare closed forms with brute-force oracles")
    v.add_argument("--trials", type=_positive_int, default=200)
    v.add_argument("--seed", type=int, default=2024)
    v.add_argument("--max-twoS", type=_positive_int, default=12)
    v.set_defaults(func=cmd_verify)

    sm = sub.add_parser("simulate", help="Monte Carlo maximum-likelihood estimation")
    sm.add_argument("config", nargs="+", help="key = value config file(s)")
    sm.add_argument("--out", default=None)
    sm.add_argument("--jobs", type=_positive_int, default=None)
    sm.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"thermomag {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"thermomag {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (UnidentifiableError, FisherPathologyError) as exc:
        print(f"thermomag {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
