"""Initial-value problems ``du/dt = f(u, t)``, ``u(0) = g`` on ``[0, X]``.

The algorithms are usually written for ``du/dx + N[u, x] = 0``; here every
problem stores the explicit right-hand side ``f = -N``. :meth:`OdeSystem.operator`
gives ``N`` back for code that wants the other sign.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping

import numba
import numpy as np

from .errors import ConfigError, DomainError

Rhs = Callable[[np.ndarray, float], np.ndarray]

PROBLEM_IDS = ("harmonic", "slingshot", "lorenz")


@dataclass(frozen=True)
class OdeSystem:
    name: str
    rhs: Rhs
    initial_state: tuple[float, ...]
    horizon: float
    params: Mapping[str, float] = field(default_factory=dict)
    component_names: tuple[str, ...] = ()
    # Optional numba kernel ``kernel(u, t, *jit_args)`` equal to ``rhs``; enables compiled loops.
    jit_rhs: Callable | None = field(default=None, compare=False, repr=False)
    jit_args: tuple = ()

    def __post_init__(self):
        if not self.horizon > 0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if len(self.initial_state) < 1:
            raise ValueError("initial_state must have at least one component")
        if not self.component_names:
            object.__setattr__(self, "component_names",
                               tuple(f"u{i}" for i in range(len(self.initial_state))))
        if len(self.component_names) != len(self.initial_state):
            raise ValueError("component_names and initial_state differ in length")

    @property
    def dimension(self) -> int:
        return len(self.initial_state)

    def initial_array(self) -> np.ndarray:
        return np.array(self.initial_state, dtype=np.float64)

    def operator(self, u, t) -> np.ndarray:
        """The operator N with du/dt + N[u, t] = 0."""
        return -np.asarray(self.rhs(np.asarray(u, dtype=np.float64), t))


# -- harmonic oscillator -------------------------------------------------------

@numba.njit(cache=True)
def rhs_harmonic(u, t, omega=1.0):
    return np.array([u[1], -omega * omega * u[0]])


def harmonic_exact(t, omega=1.0):
    """Exact solution for u(0) = (1, 0): (cos wt, -sin wt). Vectorized over t."""
    t = np.asarray(t, dtype=np.float64)
    out = np.stack([np.cos(omega * t), -np.sin(omega * t)], axis=-1)
    return out


# -- relativistic slingshot ----------------------------------------------------

@dataclass(frozen=True)
class SlingshotParams:
    epsilon: float = 4.0 * math.pi
    foil: float = 0.01 * 2.0 * math.pi
    pulse_period: float = 1.0
    horizon: float = 4.0
    amplitude: float = 1.0

    def __post_init__(self):
        for name in ("epsilon", "foil", "pulse_period", "horizon", "amplitude"):
            if not getattr(self, name) > 0:
                raise ValueError(f"slingshot parameter {name} must be positive")

    @property
    def laser_frequency(self) -> float:
        return 2.0 * math.pi / self.pulse_period


@numba.njit(cache=True)
def _envelope(t, pulse_period, duration, amplitude):
    if t < 0.0 or t > duration:
        return 0.0, 0.0
    env = amplitude * math.sin(math.pi * t / duration) ** 2
    phase = 2.0 * math.pi * t / pulse_period
    return env * math.sin(phase), env * math.cos(phase)


def slingshot_envelope(t, p: SlingshotParams) -> tuple[float, float]:
    """Laser vector potential (a_y, a_z); zero outside the pulse [0, T]."""
    return _envelope(float(t), p.pulse_period, p.horizon, p.amplitude)


@numba.njit(cache=True)
def _slingshot_kernel(state, t, epsilon, foil, pulse_period, duration, amplitude):
    h = state[0]
    x = state[1]
    if not h > 0:
        raise DomainError("slingshot: h <= 0")
    ay, az = _envelope(t, pulse_period, duration, amplitude)
    uy = ay - epsilon * state[2]
    uz = az - epsilon * state[3]
    uperp2 = uy * uy + uz * uz
    b = (1.0 + uperp2 - h * h) / (2.0 * h * h)
    if not 1.0 + b > 0:
        raise DomainError("slingshot: 1 + b <= 0")
    ex = epsilon * math.tanh(x / (4.0 * foil))
    inv = 1.0 / (1.0 + b)
    out = np.empty(4)
    out[0] = (ex - epsilon * uperp2 / (1.0 + uperp2)) * inv
    out[1] = b * inv
    out[2] = uy * inv / h
    out[3] = uz * inv / h
    return out


def rhs_slingshot(state, t, p: SlingshotParams):
    """Right-hand side for the state (h, x, y, z); raises DomainError if h <= 0 or 1 + b <= 0."""
    return _slingshot_kernel(np.asarray(state, dtype=np.float64), float(t), *_slingshot_args(p))


def _slingshot_args(p: SlingshotParams) -> tuple:
    return (p.epsilon, p.foil, p.pulse_period, p.horizon, p.amplitude)


# -- Lorenz system -------------------------------------------------------------

@numba.njit(cache=True)
def rhs_lorenz(state, t, sigma=10.0, rho=28.0, beta=8.0 / 3.0):
    x = state[0]
    y = state[1]
    z = state[2]
    return np.array([sigma * (y - x), x * (rho - z) - y, x * y - beta * z])


# -- registry ------------------------------------------------------------------

_DEFAULTS = {
    "harmonic": {"omega": 1.0, "T": 100.0, "u1_0": 1.0, "u2_0": 0.0},
    "slingshot": {"epsilon": 4.0 * math.pi, "foil": 0.01 * 2.0 * math.pi, "pulse_period": 1.0,
                  "T": 4.0, "a0": 1.0, "h0": 1.0, "x0": 0.0, "y0": 0.0, "z0": 0.0},
    "lorenz": {"sigma": 10.0, "rho": 28.0, "beta": 8.0 / 3.0, "T": 20.0,
               "x0": 1.0, "y0": 1.0, "z0": 1.0},
}


def default_params(problem_id: str) -> dict[str, float]:
    try:
        return dict(_DEFAULTS[problem_id])
    except KeyError:
        raise ConfigError(f"unknown problem {problem_id!r}; expected one of {PROBLEM_IDS}") from None


def make_problem(problem_id: str, **overrides: float) -> OdeSystem:
    """Build a registered problem, optionally overriding named parameters."""
    params = default_params(problem_id)
    unknown = set(overrides) - set(params)
    if unknown:
        raise ConfigError(f"unknown parameter(s) for {problem_id}: {sorted(unknown)}; "
                          f"known: {sorted(params)}")
    params.update({k: float(v) for k, v in overrides.items()})

    if problem_id == "harmonic":
        args = (params["omega"],)
        return OdeSystem("harmonic", _bind(rhs_harmonic, args),
                         (params["u1_0"], params["u2_0"]), params["T"], params, ("u1", "u2"),
                         rhs_harmonic, args)
    if problem_id == "slingshot":
        sp = SlingshotParams(params["epsilon"], params["foil"], params["pulse_period"],
                             params["T"], params["a0"])
        args = _slingshot_args(sp)
        return OdeSystem("slingshot", _bind(_slingshot_kernel, args),
                         (params["h0"], params["x0"], params["y0"], params["z0"]),
                         params["T"], params, ("h", "x", "y", "z"), _slingshot_kernel, args)
    args = (params["sigma"], params["rho"], params["beta"])
    return OdeSystem("lorenz", _bind(rhs_lorenz, args),
                     (params["x0"], params["y0"], params["z0"]), params["T"], params,
                     ("x", "y", "z"), rhs_lorenz, args)


def _bind(kernel, args):
    def rhs(u, t):
        return kernel(np.asarray(u, dtype=np.float64), float(t), *args)
    return rhs


def with_horizon(problem: OdeSystem, horizon: float) -> OdeSystem:
    return replace(problem, horizon=float(horizon))
