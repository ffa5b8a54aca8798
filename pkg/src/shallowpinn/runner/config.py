"""Experiment configuration and its INI-style text format.

A config file has up to five sections; every key is optional except
``experiment.problem`` and ``experiment.activation``::

    [experiment]
    problem = harmonic        ; harmonic | slingshot | lorenz
    activation = resigma      ; resigma | sigmoid
    mode = pidd               ; pidd | nbn
    neurons = 20000           ; hidden neurons (per window for nbn)
    kappa_window = 10         ; sigmoid overlap normaliser half-width

    [training]                ; nbn only
    windows = 20
    epochs = 3

    [reference]
    rel_tol = 1e-12
    abs_tol = 1e-12

    [problem]                 ; named parameter overrides, see make_problem
    omega = 1.0

    [output]
    dir = results/harmonic
"""
from __future__ import annotations

import configparser
import io
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from ..activation import ActivationKind
from ..errors import ConfigError
from ..pidd import DEFAULT_KAPPA_WINDOW
from ..problems import PROBLEM_IDS, default_params

MODES = ("pidd", "nbn")


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str
    activation: ActivationKind
    mode: str = "pidd"
    neurons: int = 20000
    windows: int = 20
    epochs: int = 3
    kappa_window: int = DEFAULT_KAPPA_WINDOW
    ref_rel_tol: float = 1e-12
    ref_abs_tol: float = 1e-12
    problem_overrides: dict = field(default_factory=dict)
    output_dir: str = "results"

    def __post_init__(self):
        try:
            object.__setattr__(self, "activation", ActivationKind.parse(self.activation))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.problem not in PROBLEM_IDS:
            raise ConfigError(f"unknown problem {self.problem!r}; expected one of {PROBLEM_IDS}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        for name in ("neurons", "windows", "epochs", "kappa_window"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.mode == "nbn" and self.neurons < 2:
            raise ConfigError("nbn windows need at least 2 neurons")
        for name in ("ref_rel_tol", "ref_abs_tol"):
            if not 0.0 < getattr(self, name) <= 1e-2:
                raise ConfigError(f"{name} must lie in (0, 1e-2]")
        known = default_params(self.problem)
        unknown = set(self.problem_overrides) - set(known)
        if unknown:
            raise ConfigError(f"unknown {self.problem} parameter(s) {sorted(unknown)}; known: {sorted(known)}")

    def with_overrides(self, **changes) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})

    def as_dict(self) -> dict:
        d = asdict(self)
        d["activation"] = self.activation.value
        d["problem_overrides"] = dict(sorted(self.problem_overrides.items()))
        if self.mode == "pidd":
            del d["windows"], d["epochs"]
        return d


def _to_int(section, key, raw):
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected an integer, got {raw!r}") from None


def _to_float(section, key, raw):
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected a number, got {raw!r}") from None


def parse_config(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str  # parameter names such as T are case-sensitive
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    allowed = {"experiment": {"problem", "activation", "mode", "neurons", "kappa_window"},
               "training": {"windows", "epochs"},
               "reference": {"rel_tol", "abs_tol"},
               "output": {"dir"}}
    for section in cp.sections():
        if section == "problem":
            continue
        if section not in allowed:
            raise ConfigError(f"unknown section [{section}]")
        extra = set(cp[section]) - allowed[section]
        if extra:
            raise ConfigError(f"unknown key(s) {sorted(extra)} in [{section}]")
    if not cp.has_section("experiment"):
        raise ConfigError("missing [experiment] section")
    ex = cp["experiment"]
    for key in ("problem", "activation"):
        if key not in ex:
            raise ConfigError(f"[experiment] {key} is required")
    kw = {"problem": ex["problem"].strip(), "activation": ex["activation"].strip()}
    if "mode" in ex:
        kw["mode"] = ex["mode"].strip()
    for key in ("neurons", "kappa_window"):
        if key in ex:
            kw[key] = _to_int("experiment", key, ex[key])
    if cp.has_section("training"):
        for key in ("windows", "epochs"):
            if key in cp["training"]:
                kw[key] = _to_int("training", key, cp["training"][key])
    if cp.has_section("reference"):
        ref = cp["reference"]
        if "rel_tol" in ref:
            kw["ref_rel_tol"] = _to_float("reference", "rel_tol", ref["rel_tol"])
        if "abs_tol" in ref:
            kw["ref_abs_tol"] = _to_float("reference", "abs_tol", ref["abs_tol"])
    if cp.has_section("problem"):
        kw["problem_overrides"] = {k: _to_float("problem", k, v) for k, v in cp["problem"].items()}
    if cp.has_section("output") and "dir" in cp["output"]:
        kw["output_dir"] = cp["output"]["dir"].strip()
    return ExperimentConfig(**kw)


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


def serialize_config(config: ExperimentConfig) -> str:
    buf = io.StringIO()
    buf.write("[experiment]\n")
    buf.write(f"problem = {config.problem}\n")
    buf.write(f"activation = {config.activation.value}\n")
    buf.write(f"mode = {config.mode}\n")
    buf.write(f"neurons = {config.neurons}\n")
    buf.write(f"kappa_window = {config.kappa_window}\n")
    if config.mode == "nbn":
        buf.write(f"\n[training]\nwindows = {config.windows}\nepochs = {config.epochs}\n")
    buf.write(f"\n[reference]\nrel_tol = {config.ref_rel_tol!r}\nabs_tol = {config.ref_abs_tol!r}\n")
    if config.problem_overrides:
        buf.write("\n[problem]\n")
        for k, v in sorted(config.problem_overrides.items()):
            buf.write(f"{k} = {float(v)!r}\n")
    buf.write(f"\n[output]\ndir = {config.output_dir}\n")
    return buf.getvalue()
