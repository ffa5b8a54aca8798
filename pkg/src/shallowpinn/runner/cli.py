"""Command-line interface.

Exit codes: 0 success, 1 configuration or usage error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import io
import json
import logging
import sys
from pathlib import Path

from .. import __version__
from ..errors import ConfigError, NumericalError
from ..reference import integrate_to_grid
from .config import ExperimentConfig, load_config
from .experiments import Series, activation_label, atomic_write, build_problem, run_experiment, write_outputs
from .plot import emit_plot
from .published import published_for

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    # usage mistakes are configuration errors, not numerical failures
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _parse_assignment(text: str) -> tuple[str, float]:
    key, sep, value = text.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"--set expects NAME=VALUE, got {text!r}")
    try:
        return key.strip(), float(value)
    except ValueError:
        raise ConfigError(f"--set {key}: {value!r} is not a number") from None


def _experiment_flags(p: argparse.ArgumentParser, training: bool) -> None:
    p.add_argument("--config", help="INI experiment file; flags below override its values")
    p.add_argument("--problem", choices=["harmonic", "slingshot", "lorenz"])
    p.add_argument("--activation", choices=["sigmoid", "resigma"])
    p.add_argument("--neurons", type=int, help="hidden neurons" + (" per window" if training else ""))
    if training:
        p.add_argument("--windows", type=int)
        p.add_argument("--epochs", type=int)
    p.add_argument("--kappa-window", type=int, dest="kappa_window")
    p.add_argument("--rtol", type=float, help="reference relative tolerance")
    p.add_argument("--atol", type=float, help="reference absolute tolerance")
    p.add_argument("--set", action="append", default=[], metavar="NAME=VALUE",
                   help="override a problem parameter, e.g. --set omega=2")
    p.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="shallowpinn", description="Shallow-network ODE solvers: initialization, "
                                                      "neuron-by-neuron training and error reports.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ref = sub.add_parser("reference", help="reference solution on a uniform grid, written as CSV")
    ref.add_argument("--problem", required=True, choices=["harmonic", "slingshot", "lorenz"])
    ref.add_argument("--neurons", type=int, default=20000, help="grid points (step = T / neurons)")
    ref.add_argument("--rtol", type=float, default=1e-12)
    ref.add_argument("--atol", type=float, default=1e-12)
    ref.add_argument("--set", action="append", default=[], metavar="NAME=VALUE")
    ref.add_argument("--out", required=True, help="CSV file")

    _experiment_flags(sub.add_parser("init", help="closed-form initialization from reference data"), False)
    _experiment_flags(sub.add_parser("train", help="windowed neuron-by-neuron training"), True)

    rep = sub.add_parser("report", help="tabulate report.json files")
    rep.add_argument("paths", nargs="+", help="report.json files or directories containing one")
    rep.add_argument("--out", help="also write the table as CSV")

    plot = sub.add_parser("plot", help="SVG figure from a series.csv")
    plot.add_argument("series", help="series.csv or a directory containing one")
    plot.add_argument("--out", required=True, help="SVG file")
    plot.add_argument("--title", default="")
    return parser


def config_from_args(args, mode: str) -> ExperimentConfig:
    overrides = dict(_parse_assignment(s) for s in args.set)
    if args.config:
        cfg = load_config(args.config)
        if cfg.mode != mode:
            raise ConfigError(f"{args.config} describes a {cfg.mode} experiment; use the "
                              f"{'init' if cfg.mode == 'pidd' else 'train'} command")
        changes = {"problem": args.problem, "activation": args.activation, "neurons": args.neurons,
                   "kappa_window": args.kappa_window, "ref_rel_tol": args.rtol, "ref_abs_tol": args.atol,
                   "output_dir": args.out}
        if mode == "nbn":
            changes.update(windows=args.windows, epochs=args.epochs)
        if args.problem and args.problem != cfg.problem:
            cfg = cfg.with_overrides(problem_overrides={})  # old overrides belong to another problem
        cfg = cfg.with_overrides(**changes)
        if overrides:
            cfg = cfg.with_overrides(problem_overrides={**cfg.problem_overrides, **overrides})
        return cfg
    if not (args.problem and args.activation):
        raise ConfigError("give --config or both --problem and --activation")
    kw = {"problem": args.problem, "activation": args.activation, "mode": mode,
          "neurons": args.neurons or (20000 if mode == "pidd" else 10000),
          "problem_overrides": overrides}
    for key, value in (("kappa_window", args.kappa_window), ("ref_rel_tol", args.rtol),
                       ("ref_abs_tol", args.atol), ("output_dir", args.out)):
        if value is not None:
            kw[key] = value
    if mode == "nbn":
        kw.update({k: v for k, v in (("windows", args.windows), ("epochs", args.epochs)) if v is not None})
    return ExperimentConfig(**kw)


def _cmd_reference(args) -> int:
    overrides = dict(_parse_assignment(s) for s in args.set)
    cfg = ExperimentConfig(args.problem, "resigma", neurons=args.neurons, ref_rel_tol=args.rtol,
                           ref_abs_tol=args.atol, problem_overrides=overrides)
    if cfg.neurons < 2:
        raise ConfigError("--neurons must be >= 2 for a reference grid")
    sol = integrate_to_grid(build_problem(cfg), cfg.neurons, cfg.ref_rel_tol, cfg.ref_abs_tol)
    atomic_write(args.out, sol.csv_text())
    print(f"wrote {sol.count} rows to {args.out} ({sol.stats['accepted_steps']} steps)")
    return EXIT_OK


def _cmd_experiment(args, mode: str) -> int:
    cfg = config_from_args(args, mode)
    report = run_experiment(cfg)
    paths = write_outputs(report, cfg.output_dir)
    if not report.ok:
        f = report.failure
        print(f"{f['stage']} failed: {f['type']}: {f['message']}", file=sys.stderr)
        print(f"wrote {paths[0]}", file=sys.stderr)
        return EXIT_NUMERICAL
    errs = ", ".join(f"{c}={e:.3e}" for c, e in zip(report.components, report.relative_l2))
    print(f"{cfg.problem}/{activation_label(cfg.activation)}/{mode}: relative L2 {errs}; "
          f"{report.wall_clock_seconds:.3f} s")
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK


def _load_report(path: str) -> dict:
    p = Path(path)
    if p.is_dir():
        p = p / "report.json"
    try:
        return json.loads(p.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read report {p}: {exc}") from None


def _cmd_report(args) -> int:
    rows = []
    for path in args.paths:
        d = _load_report(path)
        c = d["config"]
        pub = published_for(c["mode"], c["problem"], c["activation"])
        rows.append({
            "mode": c["mode"], "problem": c["problem"], "activation": c["activation"],
            "status": d["status"],
            "relative_l2": " ".join(f"{e:.3e}" for e in d["relative_l2"]),
            "published_l2": " ".join(f"{e:.2e}" for e in pub[0]) if pub else "",
            "seconds": f"{d.get('wall_clock_seconds', 0.0):.4g}",
            "published_seconds": f"{pub[1]:g}" if pub else "",
        })
    cols = list(rows[0])
    widths = {k: max(len(k), *(len(r[k]) for r in rows)) for k in cols}
    print("  ".join(k.ljust(widths[k]) for k in cols))
    for r in rows:
        print("  ".join(r[k].ljust(widths[k]) for k in cols))
    if args.out:
        buf = io.StringIO()
        buf.write(",".join(cols) + "\n")
        for r in rows:
            buf.write(",".join(r[k] for k in cols) + "\n")
        atomic_write(args.out, buf.getvalue())
    return EXIT_OK if all(r["status"] == "ok" for r in rows) else EXIT_NUMERICAL


def _cmd_plot(args) -> int:
    p = Path(args.series)
    if p.is_dir():
        p = p / "series.csv"
    try:
        series = Series.from_csv(p.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read series {p}: {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"{p}: {exc}") from None
    pred = {c: series.prediction[:, i] for i, c in enumerate(series.components)}
    ref = {c: series.reference[:, i] for i, c in enumerate(series.components)}
    try:
        svg = emit_plot(series.times, pred, ref, title=args.title)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    atomic_write(args.out, svg)
    print(f"wrote {args.out}")
    return EXIT_OK


def main(argv=None) -> int:
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        if args.command == "reference":
            return _cmd_reference(args)
        if args.command == "init":
            return _cmd_experiment(args, "pidd")
        if args.command == "train":
            return _cmd_experiment(args, "nbn")
        if args.command == "report":
            return _cmd_report(args)
        return _cmd_plot(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
