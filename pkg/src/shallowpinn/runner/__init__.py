"""Experiment orchestration: configs, pipelines, reports, plots and the CLI."""
from .config import ExperimentConfig, load_config, parse_config, serialize_config
from .experiments import (ErrorReport, Series, atomic_write, run_experiment, run_nbn_experiment,
                          run_pidd_experiment, write_outputs)
from .plot import build_panels, emit_plot

__all__ = [
    "ExperimentConfig", "load_config", "parse_config", "serialize_config",
    "ErrorReport", "Series", "atomic_write", "run_experiment", "run_nbn_experiment",
    "run_pidd_experiment", "write_outputs", "build_panels", "emit_plot",
]
