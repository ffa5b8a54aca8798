"""Reference trajectories on uniform grids.

``integrate_to_grid`` is an adaptive Dormand-Prince 5(4) integrator with
local extrapolation and FSAL. Every output time is hit exactly by clipping
the step, so no interpolation error enters the reference values.
``rk4_fixed`` is the classical fixed-step fourth-order method and only
serves as a cross-check.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import ConvergenceError, DomainError
from .problems import OdeSystem

# Dormand & Prince (1980), RK5(4)7M. Row i of A gives stage i+1 from stages 0..i.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_ORDER = 5


@dataclass
class GridSolution:
    """Solution values on the uniform grid ``origin + i * step``, ``i < count``."""

    times: np.ndarray
    values: np.ndarray
    origin: float
    step: float
    problem_id: str
    rel_tol: float
    abs_tol: float
    stats: dict = field(default_factory=dict)

    @property
    def count(self) -> int:
        return self.values.shape[0]

    @property
    def dimension(self) -> int:
        return self.values.shape[1]

    def component(self, l: int) -> np.ndarray:
        return self.values[:, l]

    def csv_text(self) -> str:
        buf = io.StringIO()
        n = self.dimension
        buf.write(",".join(["t"] + [f"u{i}" for i in range(n)]) + "\n")
        for t, row in zip(self.times, self.values):
            buf.write(",".join(f"{v:.17g}" for v in (t, *row)) + "\n")
        return buf.getvalue()


def _rms(x: np.ndarray) -> float:
    return math.sqrt(float(np.dot(x, x)) / x.size)


def _call(problem: OdeSystem, y: np.ndarray, t: float) -> np.ndarray:
    try:
        out = np.asarray(problem.rhs(y, t), dtype=np.float64)
    except DomainError as exc:
        raise DomainError(f"{exc} (t = {t!r})") from exc
    if not np.all(np.isfinite(out)):
        raise DomainError(f"{problem.name}: non-finite right-hand side at t = {t!r}")
    return out


def _initial_step(problem, t0, y0, f0, rtol, atol, span):
    sc = atol + rtol * np.abs(y0)
    d0 = _rms(y0 / sc)
    d1 = _rms(f0 / sc)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, span)
    f1 = _call(problem, y0 + h0 * f0, t0 + h0)
    d2 = _rms((f1 - f0) / sc) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / _ORDER)
    return min(100.0 * h0, h1, span)


def integrate_points(problem: OdeSystem, times, rel_tol: float = 1e-12, abs_tol: float = 1e-12):
    """Integrate from t = times[0] (holding the initial state) through every time in ``times``.

    Returns ``(values, stats)``. ``times`` must be strictly increasing.
    """
    times = np.asarray(times, dtype=np.float64)
    if times.ndim != 1 or times.size < 1:
        raise ValueError("times must be a non-empty 1-D sequence")
    if times.size > 1 and not np.all(np.diff(times) > 0):
        raise ValueError("times must be strictly increasing")
    if not (0.0 < rel_tol <= 1e-2 and 0.0 < abs_tol <= 1e-2):
        raise ValueError("tolerances must lie in (0, 1e-2]")

    n = problem.dimension
    y = problem.initial_array()
    t = float(times[0])
    out = np.empty((times.size, n))
    out[0] = y
    span = float(times[-1] - times[0])
    stats = {"accepted_steps": 0, "rejected_steps": 0, "rhs_evaluations": 0}
    if times.size == 1:
        return out, stats

    h_floor = 1e-14 * max(span, abs(times[-1]))
    k = np.empty((7, n))
    k[0] = _call(problem, y, t)
    h = _initial_step(problem, t, y, k[0], rel_tol, abs_tol, span)
    nfev = 2

    for i in range(1, times.size):
        target = float(times[i])
        while t < target:
            remaining = target - t
            if remaining < h_floor:
                # output times closer than the step floor: one Euler micro-step, error O(remaining^2)
                y = y + remaining * k[0]
                t = target
                k[0] = _call(problem, y, t)
                nfev += 1
                break
            clipped = h >= remaining
            h_try = remaining if clipped else h
            while True:
                if h_try < h_floor:
                    raise ConvergenceError(
                        f"{problem.name}: step size {h_try:.3e} underflowed at t = {t!r}")
                for s in range(6):
                    ys = y + h_try * (_A[s] @ k[: s + 1])
                    k[s + 1] = _call(problem, ys, t + _C[s + 1] * h_try)
                nfev += 6
                y_new = ys  # the 7th stage is evaluated at the 5th-order solution (FSAL)
                err_vec = h_try * (_E @ k)
                sc = abs_tol + rel_tol * np.maximum(np.abs(y), np.abs(y_new))
                err = _rms(err_vec / sc)
                if err <= 1.0:
                    break
                stats["rejected_steps"] += 1
                h_try *= max(_MIN_FACTOR, _SAFETY * err ** (-1.0 / _ORDER))
                clipped = False
            stats["accepted_steps"] += 1
            factor = _MAX_FACTOR if err == 0.0 else min(_MAX_FACTOR, max(_MIN_FACTOR, _SAFETY * err ** (-1.0 / _ORDER)))
            h_next = h_try * factor
            if clipped:
                # a short step onto a grid time says nothing new about the natural step size
                h_next = max(h_next, h)
            t = target if clipped else t + h_try
            y = y_new
            k[0] = k[6]
            h = h_next
        out[i] = y
    stats["rhs_evaluations"] = nfev
    return out, stats


def integrate_to_grid(problem: OdeSystem, count: int, rel_tol: float = 1e-12, abs_tol: float = 1e-12,
                      endpoint: bool = False) -> GridSolution:
    """Reference solution at ``count`` uniform points of ``[0, X]``.

    With ``endpoint=False`` (the collocation convention) the step is X / count
    and the last point is X - step; with ``endpoint=True`` the step is
    X / (count - 1) and the grid ends at X.
    """
    if count < 2:
        raise ValueError("count must be >= 2")
    step = problem.horizon / (count - 1 if endpoint else count)
    times = step * np.arange(count, dtype=np.float64)
    values, stats = integrate_points(problem, times, rel_tol, abs_tol)
    return GridSolution(times, values, 0.0, step, problem.name, rel_tol, abs_tol, stats)


@numba.njit(cache=True)
def _rk4_loop(f, args, y0, h, nsteps, h_last):
    out = np.empty((nsteps + 1, y0.size))
    out[0] = y0
    y = y0.copy()
    for i in range(nsteps):
        t = i * h
        hh = h_last if i == nsteps - 1 else h
        k1 = f(y, t, *args)
        k2 = f(y + 0.5 * hh * k1, t + 0.5 * hh, *args)
        k3 = f(y + 0.5 * hh * k2, t + 0.5 * hh, *args)
        k4 = f(y + hh * k3, t + hh, *args)
        y = y + (hh / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[i + 1] = y
    return out


def rk4_fixed(problem: OdeSystem, step: float, horizon: float | None = None) -> GridSolution:
    """Classical RK4 with a fixed step; the final step is shortened to land on ``horizon``.

    Uses a compiled loop when the problem carries a numba kernel.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    horizon = problem.horizon if horizon is None else float(horizon)
    nsteps = max(1, int(math.ceil(horizon / step - 1e-9)))
    h_last = horizon - (nsteps - 1) * step
    y0 = problem.initial_array()
    if problem.jit_rhs is not None:
        values = _rk4_loop(problem.jit_rhs, tuple(problem.jit_args), y0, float(step), nsteps, float(h_last))
    else:
        values = np.empty((nsteps + 1, y0.size))
        values[0] = y = y0
        f = problem.rhs
        for i in range(nsteps):
            t = i * step
            hh = h_last if i == nsteps - 1 else step
            k1 = np.asarray(f(y, t))
            k2 = np.asarray(f(y + 0.5 * hh * k1, t + 0.5 * hh))
            k3 = np.asarray(f(y + 0.5 * hh * k2, t + 0.5 * hh))
            k4 = np.asarray(f(y + hh * k3, t + hh))
            y = y + (hh / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            values[i + 1] = y
    times = step * np.arange(nsteps + 1, dtype=np.float64)
    times[-1] = horizon
    return GridSolution(times, values, 0.0, float(step), problem.name, 0.0, 0.0,
                        {"steps": nsteps, "rhs_evaluations": 4 * nsteps})
