"""Physics-informed data-driven (PIDD) initialization.

Every parameter of the network is set in closed form. Hidden neuron k is
centred on grid point x_k = k * dx. Its output weight is the right-hand side
at the reference state u_k, scaled so that the network's slope at x_k
reproduces f(u_k, x_k):

* rectified sigmoid: W2[k] = (dx / dz) * f_l(u_k, x_k), with dz = 1. The ramps
  of neighbouring neurons do not overlap, so each grid point sees exactly
  one unsaturated neuron.
* sigmoid: W2[k] = dx / (2 dz) * f_l(u_k, x_k) / kappa_k, with
  dz = ln(2 + sqrt 3) / 2. Here kappa_k adds up the derivative overlap of
  the neighbouring neurons.

The output bias is chosen so that the network reproduces u_l(0) exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .activation import ActivationKind, activate
from .errors import GridMismatchError
from .problems import OdeSystem
from .reference import GridSolution
from .shallow_net import ShallowNet, StructuredGrid, half_width

#: Neighbours on each side included in kappa for sigmoid nets.
DEFAULT_KAPPA_WINDOW = 10


@dataclass(frozen=True)
class InitRecipe:
    activation: ActivationKind
    neuron_count: int
    delta_zeta: float
    kappa_window: int = DEFAULT_KAPPA_WINDOW

    @classmethod
    def for_activation(cls, kind, neuron_count: int, kappa_window: int = DEFAULT_KAPPA_WINDOW):
        kind = ActivationKind.parse(kind)
        return cls(kind, int(neuron_count), half_width(kind), int(kappa_window))

    def __post_init__(self):
        if self.neuron_count < 1:
            raise ValueError("neuron_count must be >= 1")
        if abs(self.delta_zeta - half_width(self.activation)) > 1e-15:
            raise ValueError(f"delta_zeta {self.delta_zeta} does not match {self.activation.value}")
        if self.activation is ActivationKind.SIGMOID and self.kappa_window < 1:
            raise ValueError("kappa_window must be >= 1 for sigmoid nets")


def _sigmoid_prime(x):
    s = 1.0 / (1.0 + math.exp(-x))
    return s * (1.0 - s)


def kappa(k: int, n_total: int, L: int, delta_zeta: float) -> float:
    """Derivative-overlap normaliser of neuron k, window clipped to 0..n_total-1."""
    if not 0 <= k < n_total:
        raise IndexError(f"neuron index {k} outside 0..{n_total - 1}")
    total = 0.0
    for m in range(max(0, k - L), min(n_total - 1, k + L) + 1):
        total += _sigmoid_prime(2.0 * delta_zeta * (k - m))
    return total


def kappa_vector(n_total: int, L: int, delta_zeta: float) -> np.ndarray:
    """All kappa_k at once; agrees with :func:`kappa` up to summation order."""
    out = np.zeros(n_total)
    for d in range(-L, L + 1):
        # neuron k receives the term for m = k - d when 0 <= k - d < n_total
        lo, hi = max(0, d), min(n_total, n_total + d)
        if lo < hi:
            out[lo:hi] += _sigmoid_prime(2.0 * delta_zeta * d)
    return out


def rhs_on_grid(problem: OdeSystem, data: GridSolution) -> np.ndarray:
    """f(u_k, x_k) for every row of ``data``; shape (count, n)."""
    return np.array([problem.rhs(row, t) for t, row in zip(data.times, data.values)])


def _check(data: GridSolution, problem: OdeSystem, l: int) -> None:
    if data.dimension != problem.dimension:
        raise GridMismatchError(f"data has {data.dimension} components, problem has {problem.dimension}")
    if not 0 <= l < problem.dimension:
        raise IndexError(f"component {l} outside 0..{problem.dimension - 1}")
    if data.origin != 0.0:
        raise GridMismatchError("data grid must start at x = 0")
    if not math.isclose(data.step * data.count, problem.horizon, rel_tol=1e-12):
        raise GridMismatchError(f"data grid step {data.step} x {data.count} rows does not cover "
                                f"[0, {problem.horizon}) with step X/N")


def _build(kind, l, data, f_col, scale):
    grid = StructuredGrid(0.0, data.step, data.count, half_width(kind))
    w1, b1 = grid.hidden_layer()
    w2 = scale * f_col
    x0 = data.times[0]
    at_origin = w2 * activate(kind, w1 * x0 + b1)
    b2 = data.values[0, l] - np.add.accumulate(at_origin)[-1]
    return ShallowNet(kind, w1, b1, w2, b2)


def pidd_init_resigma(l: int, data: GridSolution, problem: OdeSystem, f_grid: np.ndarray | None = None) -> ShallowNet:
    """Rectified-sigmoid net for component ``l`` from reference data."""
    _check(data, problem, l)
    f = rhs_on_grid(problem, data) if f_grid is None else f_grid
    dz = half_width(ActivationKind.RECTIFIED_SIGMOID)
    return _build(ActivationKind.RECTIFIED_SIGMOID, l, data, f[:, l], data.step / dz)


def pidd_init_sigmoid(l: int, data: GridSolution, problem: OdeSystem, L: int = DEFAULT_KAPPA_WINDOW,
                      f_grid: np.ndarray | None = None) -> ShallowNet:
    """Sigmoid net for component ``l`` from reference data, kappa window ``L``."""
    _check(data, problem, l)
    if L < 1:
        raise ValueError("kappa window must be >= 1")
    f = rhs_on_grid(problem, data) if f_grid is None else f_grid
    dz = half_width(ActivationKind.SIGMOID)
    kap = kappa_vector(data.count, L, dz)
    return _build(ActivationKind.SIGMOID, l, data, f[:, l], data.step / (2.0 * dz * kap))


def pidd_init(data: GridSolution, problem: OdeSystem, activation, L: int = DEFAULT_KAPPA_WINDOW) -> list[ShallowNet]:
    """One net per solution component; the right-hand side is evaluated once for all of them."""
    kind = ActivationKind.parse(activation)
    _check(data, problem, 0)
    f = rhs_on_grid(problem, data)
    if kind is ActivationKind.RECTIFIED_SIGMOID:
        return [pidd_init_resigma(l, data, problem, f_grid=f) for l in range(problem.dimension)]
    return [pidd_init_sigmoid(l, data, problem, L, f_grid=f) for l in range(problem.dimension)]
