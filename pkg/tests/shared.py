"""Expensive full-size runs, computed once per test session and shared across modules."""
from __future__ import annotations

import time
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from shallowpinn import (WindowPlan, integrate_points, integrate_to_grid, make_problem, nbn_train,
                         pidd_init, relative_l2)
from shallowpinn.activation import ActivationKind
from shallowpinn.shallow_net import FastEvaluator, StructuredGrid, half_width

FULL_NEURONS = 20000
PLAN = WindowPlan(20, 10000, 3)
TOL = 1e-12


@dataclass
class Run:
    errors: tuple
    seconds: float
    extra: dict


@lru_cache(maxsize=None)
def reference_grid(problem_id: str, count: int = FULL_NEURONS):
    return integrate_to_grid(make_problem(problem_id), count, TOL, TOL)


@lru_cache(maxsize=None)
def pidd_run(problem_id: str, kind: str) -> Run:
    problem = make_problem(problem_id)
    data = reference_grid(problem_id)
    start = time.perf_counter()
    nets = pidd_init(data, problem, kind)
    seconds = time.perf_counter() - start
    grid = StructuredGrid(0.0, data.step, data.count, half_width(ActivationKind.parse(kind)))
    pred = np.column_stack([FastEvaluator(n, grid)(data.times) for n in nets])
    errors = tuple(relative_l2(pred[:, l], data.values[:, l]) for l in range(problem.dimension))
    return Run(errors, seconds, {"nets": nets, "data": data, "pred": pred})


@lru_cache(maxsize=None)
def _union_reference(problem_id: str, times_key: tuple):
    times = np.array(times_key)
    values, _ = integrate_points(make_problem(problem_id), times, TOL, TOL)
    return values


@lru_cache(maxsize=None)
def nbn_run(problem_id: str, kind: str) -> Run:
    problem = make_problem(problem_id)
    start = time.perf_counter()
    model = nbn_train(problem, PLAN, kind)
    seconds = time.perf_counter() - start
    times = model.grid_times()
    ref = _union_reference(problem_id, tuple(times.tolist()))
    pred = model.evaluate(times)
    errors = tuple(relative_l2(pred[:, l], ref[:, l]) for l in range(problem.dimension))
    return Run(errors, seconds, {"model": model, "times": times, "pred": pred, "ref": ref})
