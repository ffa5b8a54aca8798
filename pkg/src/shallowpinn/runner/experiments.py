"""End-to-end pipelines: reference data, initialization or training, error report."""
from __future__ import annotations

import io
import json
import os
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..activation import ActivationKind
from ..errors import DegenerateReferenceError, GridMismatchError, NumericalError
from ..metrics import abs_error_series, relative_l2_components
from ..nbn import WindowPlan, nbn_train
from ..pidd import pidd_init
from ..problems import OdeSystem, make_problem
from ..reference import integrate_points, integrate_to_grid
from ..shallow_net import FastEvaluator, StructuredGrid, half_width
from .config import ExperimentConfig

SCHEMA_VERSION = 1

# Module errors that become a structured failure report instead of a traceback.
_RECOVERABLE = (NumericalError, GridMismatchError, DegenerateReferenceError, ValueError, ArithmeticError)


@dataclass
class Series:
    """Prediction and reference values on common time points, one column per component."""

    times: np.ndarray
    prediction: np.ndarray
    reference: np.ndarray
    components: tuple[str, ...]

    def csv_text(self) -> str:
        cols = ["t"]
        cols += [f"pred_{c}" for c in self.components]
        cols += [f"ref_{c}" for c in self.components]
        cols += [f"abserr_{c}" for c in self.components]
        err = np.abs(self.prediction - self.reference)
        table = np.column_stack([self.times, self.prediction, self.reference, err])
        buf = io.StringIO()
        buf.write(",".join(cols) + "\n")
        for row in table:
            buf.write(",".join(f"{v:.17g}" for v in row) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Series":
        lines = text.strip().splitlines()
        if len(lines) < 2:
            raise ValueError("series file has no data rows")
        header = lines[0].split(",")
        comps = tuple(h[len("pred_"):] for h in header if h.startswith("pred_"))
        n = len(comps)
        if header != ["t", *[f"pred_{c}" for c in comps], *[f"ref_{c}" for c in comps],
                      *[f"abserr_{c}" for c in comps]] or n == 0:
            raise ValueError(f"unrecognised series header: {lines[0]!r}")
        data = np.loadtxt(io.StringIO("\n".join(lines[1:])), delimiter=",", ndmin=2)
        return cls(data[:, 0], data[:, 1:1 + n], data[:, 1 + n:1 + 2 * n], comps)


@dataclass
class ErrorReport:
    config: ExperimentConfig
    components: tuple[str, ...] = ()
    relative_l2: tuple[float, ...] = ()
    eval_points: int = 0
    wall_clock_seconds: float = 0.0
    reference: dict = field(default_factory=dict)
    training: dict = field(default_factory=dict)
    failure: dict | None = None
    series: Series | None = None

    @property
    def ok(self) -> bool:
        return self.failure is None

    def __post_init__(self):
        for e in self.relative_l2:
            if not (np.isfinite(e) and e >= 0):
                raise ValueError(f"relative error {e!r} is not finite and non-negative")

    def to_dict(self, include_timing: bool = True) -> dict:
        d = {
            "schema_version": SCHEMA_VERSION,
            "tool": "shallowpinn",
            "tool_version": __version__,
            "status": "ok" if self.ok else "failed",
            "config": self.config.as_dict(),
            "components": list(self.components),
            "relative_l2": list(self.relative_l2),
            "eval_points": self.eval_points,
        }
        if include_timing:
            d["wall_clock_seconds"] = self.wall_clock_seconds
        d["reference"] = self.reference
        d["training"] = self.training
        d["failure"] = self.failure
        return d

    def to_json(self, include_timing: bool = True) -> str:
        return json.dumps(self.to_dict(include_timing), indent=2, allow_nan=False) + "\n"

    def errors_csv(self) -> str:
        return "component,relative_l2\n" + "".join(
            f"{c},{e:.17g}\n" for c, e in zip(self.components, self.relative_l2))


def _failure(config: ExperimentConfig, stage: str, exc: Exception, **partial) -> ErrorReport:
    return ErrorReport(config, failure={"stage": stage, "type": type(exc).__name__, "message": str(exc)},
                       **partial)


def _reference_meta(config: ExperimentConfig, stats: dict, points: int) -> dict:
    return {"solver": "dopri5", "rel_tol": config.ref_rel_tol, "abs_tol": config.ref_abs_tol,
            "output_points": points, **stats}


def build_problem(config: ExperimentConfig) -> OdeSystem:
    return make_problem(config.problem, **config.problem_overrides)


def run_pidd_experiment(config: ExperimentConfig) -> ErrorReport:
    """Reference on the N-point grid, closed-form nets, errors on the same grid.

    The wall clock covers the initialization only.
    """
    if config.mode != "pidd":
        raise ValueError(f"run_pidd_experiment needs mode 'pidd', got {config.mode!r}")
    problem = build_problem(config)
    names = problem.component_names
    try:
        data = integrate_to_grid(problem, config.neurons, config.ref_rel_tol, config.ref_abs_tol)
    except _RECOVERABLE as exc:
        return _failure(config, "reference", exc, components=names)
    ref_meta = _reference_meta(config, data.stats, data.count)
    try:
        start = time.perf_counter()
        nets = pidd_init(data, problem, config.activation, L=config.kappa_window)
        elapsed = time.perf_counter() - start
    except _RECOVERABLE as exc:
        return _failure(config, "init", exc, components=names, reference=ref_meta)
    try:
        grid = StructuredGrid(0.0, data.step, data.count, half_width(config.activation))
        pred = np.column_stack([FastEvaluator(net, grid)(data.times) for net in nets])
        errs = relative_l2_components(pred, data.values)
    except _RECOVERABLE as exc:
        return _failure(config, "evaluate", exc, components=names, reference=ref_meta,
                        wall_clock_seconds=elapsed)
    return ErrorReport(config, names, errs.per_component, errs.eval_points, elapsed, ref_meta,
                       series=Series(data.times, pred, data.values, names))


def run_nbn_experiment(config: ExperimentConfig) -> ErrorReport:
    """Windowed NbN training, then errors against the reference on the union of window grids.

    The wall clock covers the training only.
    """
    if config.mode != "nbn":
        raise ValueError(f"run_nbn_experiment needs mode 'nbn', got {config.mode!r}")
    problem = build_problem(config)
    names = problem.component_names
    plan = WindowPlan(config.windows, config.neurons, config.epochs)
    try:
        start = time.perf_counter()
        model = nbn_train(problem, plan, config.activation, kappa_window=config.kappa_window)
        elapsed = time.perf_counter() - start
    except _RECOVERABLE as exc:
        return _failure(config, "train", exc, components=names)
    training = {
        "epoch_deltas": [w.epoch_deltas for w in model.windows],
        "max_boundary_jump": float(model.boundary_jumps().max()) if config.windows > 1 else 0.0,
    }
    try:
        times = model.grid_times()
        pred = model.evaluate(times)
    except _RECOVERABLE as exc:
        return _failure(config, "evaluate", exc, components=names, training=training,
                        wall_clock_seconds=elapsed)
    try:
        ref, stats = integrate_points(problem, times, config.ref_rel_tol, config.ref_abs_tol)
    except _RECOVERABLE as exc:
        return _failure(config, "reference", exc, components=names, training=training,
                        wall_clock_seconds=elapsed)
    ref_meta = _reference_meta(config, stats, times.size)
    try:
        errs = relative_l2_components(pred, ref)
    except _RECOVERABLE as exc:
        return _failure(config, "metrics", exc, components=names, training=training,
                        reference=ref_meta, wall_clock_seconds=elapsed)
    return ErrorReport(config, names, errs.per_component, errs.eval_points, elapsed, ref_meta, training,
                       series=Series(times, pred, ref, names))


def run_experiment(config: ExperimentConfig) -> ErrorReport:
    return run_pidd_experiment(config) if config.mode == "pidd" else run_nbn_experiment(config)


def atomic_write(path: str | Path, text: str) -> None:
    """Write through a temporary file in the same directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def write_outputs(report: ErrorReport, out_dir: str | Path) -> list[Path]:
    """report.json, errors.csv and (on success) series.csv under ``out_dir``."""
    out = Path(out_dir)
    written = [out / "report.json"]
    atomic_write(written[0], report.to_json())
    if report.ok:
        written.append(out / "errors.csv")
        atomic_write(written[-1], report.errors_csv())
        if report.series is not None:
            written.append(out / "series.csv")
            atomic_write(written[-1], report.series.csv_text())
    return written


def activation_label(kind) -> str:
    return "Re-sigma" if ActivationKind.parse(kind) is ActivationKind.RECTIFIED_SIGMOID else "sigmoid"
