"""Command-line front end.

    collective-discord sweep   --model dicke --n 64 128 --lambda-range 0 1.5 151 -o d.csv
    collective-discord scaling --model lmg --n 256 1024 4096 16384
    collective-discord thermo  --model dicke --lambda-range 0 3 301 --lambda-scaled
    collective-discord xstate  0.25 0.25 0.25 0.25 0.25

Settings may come from a JSON file (``--config``); flags given on the command
line override it.  Exit status: 0 success, 1 invalid input, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys

from .exceptions import NumericalError, ValidationError
from .sweep import (
    CSV_FIELDS,
    SweepConfig,
    run_scaling,
    run_sweep,
    write_points,
    xstate_query,
)
from .thermo import discord_maximum

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2

SWEEP_KEYS = {
    "model", "n_atoms", "lambda_range", "lambda_scaled", "omega", "delta", "gamma", "n_tr", "tolerances",
    "derivative", "refine_levels", "output_path", "format", "parallelism",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage errors are input errors; status 2 is reserved for numerical failures
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _load_config(path):
    if not path:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as err:
        raise ValidationError(f"cannot read config {path}: {err}") from err
    if not isinstance(cfg, dict):
        raise ValidationError("config must be a JSON object")
    return cfg


def _n_tr(text):
    return text if text == "auto" else int(text)


def _common(p: argparse.ArgumentParser, with_n=True):
    p.add_argument("--config", help="JSON file with default settings")
    p.add_argument("--model")
    if with_n:
        p.add_argument("--n", dest="n_atoms", type=int, nargs="+", help="system sizes")
    p.add_argument("--omega", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("-o", "--output", dest="output_path")
    p.add_argument("--plot", dest="plot_dir", help="write SVG line plots to this directory")
    p.add_argument("-j", "--parallelism", type=int, help="worker processes (default from COLLECTIVE_DISCORD_WORKERS)")


def _sweep_options(p: argparse.ArgumentParser):
    p.add_argument("--lambda-range", type=float, nargs=3, metavar=("MIN", "MAX", "STEPS"))
    p.add_argument("--lambda-scaled", action="store_const", const=True, help="grid in units of lambda_c")
    p.add_argument("--n-tr", type=_n_tr, help="boson truncation or 'auto'")
    p.add_argument("--tol", type=float, help="truncation convergence tolerance")
    p.add_argument("--deriv-step", type=float, help="derivative step in units of lambda_c")
    p.add_argument("--derivative", action="store_const", const=True, help="add dD/dlambda to each row")
    p.add_argument("--refine", dest="refine_levels", type=int, help="geometric refinement levels near lambda_c")
    p.add_argument("--format", choices=("csv", "json"))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="collective-discord", description="Pairwise discord in collective spin models.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="correlations on an (N, lambda) grid")
    _common(p)
    _sweep_options(p)

    p = sub.add_parser("thermo", help="thermodynamic-limit curves and discord maximum")
    _common(p, with_n=False)
    _sweep_options(p)

    p = sub.add_parser("scaling", help="finite-size scaling fits")
    _common(p)
    p.add_argument("--deriv-step", type=float, help="derivative step in units of lambda_c (default: size dependent)")
    p.add_argument("--bracket", type=float, nargs=2, metavar=("LO", "HI"), help="search range in units of lambda_c")
    p.add_argument("--min-n-power", type=int, help="smallest N entering the power-law fit")
    p.add_argument("--min-n-log", type=int, help="smallest N entering the log2 fit")

    p = sub.add_parser("xstate", help="correlations of a single X state")
    for name in ("v_plus", "v_minus", "w", "y", "u_re"):
        p.add_argument(name, type=float)
    p.add_argument("u_im", type=float, nargs="?", default=0.0)
    return parser


def _merge(args, keys) -> dict:
    cfg = _load_config(getattr(args, "config", None))
    unknown = set(cfg) - keys - {"plot_dir", "deriv_step", "tol", "bracket", "min_n_power", "min_n_log"}
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    for key, val in vars(args).items():
        if val is not None and key not in ("command", "config", "verbose"):
            cfg[key] = val
    return cfg


def _sweep_config(cfg: dict, thermo: bool) -> SweepConfig:
    cfg = dict(cfg)
    tol = dict(cfg.pop("tolerances", {}) or {})
    if "tol" in cfg:
        tol["convergence"] = cfg.pop("tol")
    if "deriv_step" in cfg:
        tol["deriv_step"] = cfg.pop("deriv_step")
    cfg.pop("plot_dir", None)
    if "lambda_range" in cfg:
        cfg["lambda_range"] = tuple(cfg["lambda_range"])
    model = cfg.pop("model", None)
    if model is None:
        raise ValidationError("--model is required")
    if thermo and not model.startswith("thermo_"):
        model = "thermo_" + model
    try:
        return SweepConfig(model=model, tolerances=tol, **cfg)
    except TypeError as err:
        raise ValidationError(str(err)) from err


def _emit_points(points, cfg: SweepConfig, out):
    if cfg.output_path:
        return
    if cfg.format == "json":
        json.dump([p.as_dict() for p in points], out, indent=2)
        out.write("\n")
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for p in points:
        w.writerow(p.csv_row())


def cmd_sweep(args, out, thermo=False) -> int:
    raw = _merge(args, SWEEP_KEYS)
    plot_dir = raw.get("plot_dir")
    cfg = _sweep_config(raw, thermo)
    points = run_sweep(cfg)
    _emit_points(points, cfg, out)
    if thermo:
        x, d = discord_maximum(cfg.model[7:], cfg.omega, cfg.delta)
        print(f"# discord maximum at lambda/lambda_c = {x:.6f}, D = {d:.6f}", file=sys.stderr)
    if plot_dir:
        from .plotting import plot_sweep

        if cfg.output_path and cfg.format == "csv":
            csv_path = cfg.output_path
        else:
            csv_path = os.path.join(plot_dir, "sweep.csv")
            os.makedirs(plot_dir, exist_ok=True)
            write_points(points, csv_path, "csv")
        for path in plot_sweep(csv_path, plot_dir):
            print(f"# wrote {path}", file=sys.stderr)
    failed = [p for p in points if not p.converged]
    if failed:
        print(f"# {len(failed)} point(s) did not converge", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_scaling(args, out) -> int:
    keys = {"model", "n_atoms", "omega", "delta", "gamma", "output_path", "parallelism"}
    cfg = _merge(args, keys)
    model = cfg.get("model")
    if model is None:
        raise ValidationError("--model is required")
    report = run_scaling(
        model, cfg.get("n_atoms") or [],
        omega=cfg.get("omega", 1.0), delta=cfg.get("delta", 1.0), gamma=cfg.get("gamma", 0.0),
        deriv_step=cfg.get("deriv_step"), bracket=cfg.get("bracket"),
        min_n_power=cfg.get("min_n_power"), min_n_log=cfg.get("min_n_log"),
        workers=cfg.get("parallelism"),
    )
    doc = report.as_dict()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["N", "discord_critical", "extremum_lambda", "extremum_value", "deriv_step", "n_tr_used"])
    for s in report.sizes:
        w.writerow([s.n_atoms, repr(s.discord_critical), repr(s.extremum_lambda), repr(s.extremum_value),
                    repr(s.deriv_step), "" if s.n_tr_used is None else s.n_tr_used])
    pl, ll = report.power_law, report.log2_linear
    out.write(f"# power law: mu = {pl.mu:.6f}, coefficient = {pl.coefficient:.6g}, r2 = {pl.r_squared:.6f}\n")
    out.write(f"# log2 linear: slope = {ll.exponent_or_slope:.6f}, intercept = {ll.intercept:.6f}, "
              f"r2 = {ll.r_squared:.6f}\n")
    if cfg.get("output_path"):
        with open(cfg["output_path"], "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    if cfg.get("plot_dir"):
        from .plotting import plot_scaling

        for path in plot_scaling(doc, cfg["plot_dir"], stem=f"scaling_{model}"):
            print(f"# wrote {path}", file=sys.stderr)
    return EXIT_OK


def cmd_xstate(args, out) -> int:
    res = xstate_query(args.v_plus, args.v_minus, args.w, args.y, args.u_re, args.u_im)
    json.dump(res, out, indent=2)
    out.write("\n")
    return EXIT_OK


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "sweep":
            return cmd_sweep(args, out)
        if args.command == "thermo":
            return cmd_sweep(args, out, thermo=True)
        if args.command == "scaling":
            return cmd_scaling(args, out)
        return cmd_xstate(args, out)
    except ValidationError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        if getattr(err, "diagnostics", None):
            print(f"diagnostics: {err.diagnostics}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
