"""Neuron-by-neuron (NbN) training and the sequential time-window protocol.

NbN training is gradient-free and unsupervised: it only sees the problem,
never reference data. The hidden layer is fixed on a uniform grid; the
output weights start from the right-hand side frozen at the initial state
and are then refined by forward sweeps. At neuron k the current network
state u(x_k) is evaluated, using weights already refreshed in this sweep for
j < k and the previous value of W2[k] itself. The weight is then reset to
the scaled right-hand side at that state. For rectified-sigmoid nets a
converged sweep is the implicit trapezoidal rule on the collocation grid.

All n component nets are swept in lockstep, because u(x_k) couples them
through the right-hand side.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .activation import ActivationKind, activate
from .errors import DomainError, NumericalError
from .problems import OdeSystem
from .shallow_net import (FastEvaluator, ShallowNet, StructuredGrid, eval_naive,
                          half_width, local_half_window)
from .pidd import DEFAULT_KAPPA_WINDOW, kappa_vector

log = logging.getLogger(__name__)

# Sigmoid values below this are dropped from the output-bias anchor.
_ANCHOR_FLOOR = 1e-18


@dataclass(frozen=True)
class WindowPlan:
    window_count: int = 20
    neurons_per_window: int = 10000
    epochs: int = 3

    def __post_init__(self):
        for name in ("window_count", "neurons_per_window", "epochs"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")

    def window_length(self, horizon: float) -> float:
        return horizon / self.window_count


class NeuronSweeper:
    """Mutable training state for the n nets of one window.

    Parameters
    ----------
    literal_bias:
        Keep the output bias fixed at the initial state, as the algorithm is
        printed. The default re-anchors the bias after every write to a
        neuron that is active at the window origin, so the nets reproduce
        ``init_state`` exactly at s = 0.
    literal_sigmoid_coefficient:
        Sigmoid nets only: use the printed weight formula 2 dx f / dz instead
        of the kappa-normalised dx f / (2 dz kappa_k).
    """

    def __init__(self, problem: OdeSystem, window_start: float, window_len: float, init_state,
                 n_neurons: int, activation, *, kappa_window: int = DEFAULT_KAPPA_WINDOW,
                 literal_bias: bool = False, literal_sigmoid_coefficient: bool = False,
                 endpoint: bool = True):
        if not window_len > 0:
            raise ValueError("window_len must be positive")
        init = np.array(init_state, dtype=np.float64)
        if init.shape != (problem.dimension,) or not np.all(np.isfinite(init)):
            raise ValueError(f"init_state must be {problem.dimension} finite values")
        self.problem = problem
        self.kind = ActivationKind.parse(activation)
        self.window_start = float(window_start)
        self.init_state = init
        if endpoint and n_neurons > 1:
            self.grid = StructuredGrid(0.0, window_len / (n_neurons - 1), n_neurons, half_width(self.kind))
        else:
            self.grid = StructuredGrid.for_activation(self.kind, window_len, n_neurons)
        self.literal_bias = literal_bias
        n, dx, dz = problem.dimension, self.grid.step, self.grid.half_width
        self.times = self.window_start + self.grid.points()

        if self.kind is ActivationKind.RECTIFIED_SIGMOID:
            self.scale = np.full(n_neurons, dx / dz)
        elif literal_sigmoid_coefficient:
            self.scale = np.full(n_neurons, 2.0 * dx / dz)
        else:
            self.scale = dx / (2.0 * dz * kappa_vector(n_neurons, kappa_window, dz))

        # q[i] is the activation of neuron k + i - m at grid point x_k
        self.m = local_half_window(self.kind, self.grid)
        offsets = np.arange(-self.m, self.m + 1)
        self.q = np.asarray(activate(self.kind, -2.0 * dz * offsets), dtype=np.float64)
        # activation of neuron j at s = 0; only the first few are non-negligible
        a = np.asarray(activate(self.kind, self.grid.hidden_biases()[: self.m + 2]))
        live = np.nonzero(a > _ANCHOR_FLOOR)[0]
        self.anchor = a[: live[-1] + 1] if live.size else a[:0]

        self.W = np.empty((n, n_neurons))
        for k in range(n_neurons):
            self.W[:, k] = self.scale[k] * self._rhs(init, k, epoch=-1)
        self.b = init.copy()
        if not literal_bias:
            self.b -= self.W[:, : self.anchor.size] @ self.anchor
        self.deltas: list[float] = []

    @property
    def n_neurons(self) -> int:
        return self.grid.count

    def _rhs(self, u, k, epoch):
        try:
            out = self.problem.rhs(u, self.times[k])
        except DomainError as exc:
            raise DomainError(f"{exc}; epoch {epoch}, neuron {k}, state {u.tolist()}") from exc
        return out

    def state_at_node(self, k: int, prefix: np.ndarray) -> np.ndarray:
        """u(x_k) given ``prefix`` = sum of W[:, j] over j < k - m."""
        lo, hi = max(0, k - self.m), min(self.n_neurons, k + self.m + 1)
        return self.b + prefix + self.W[:, lo:hi] @ self.q[lo - k + self.m: hi - k + self.m]

    def sweep(self, epoch: int, order: str = "forward", debug: bool = False) -> float:
        """One pass over all neurons; returns the largest weight change."""
        before = self.W.copy()
        W = self.W
        with np.errstate(over="ignore", invalid="ignore"):  # divergence is reported below
            self._sweep(order, epoch, debug, before)
        if not np.all(np.isfinite(W)):
            raise NumericalError(f"non-finite weights after epoch {epoch}")
        delta = float(np.max(np.abs(W - before)))
        self.deltas.append(delta)
        return delta

    def _sweep(self, order, epoch, debug, before):
        n_neurons, m = self.n_neurons, self.m
        W, scale, anchor = self.W, self.scale, self.anchor
        if order == "forward":
            prefix = np.zeros(self.problem.dimension)
            for k in range(n_neurons):
                if k - m - 1 >= 0:
                    prefix += W[:, k - m - 1]
                u = self.state_at_node(k, prefix)
                if debug and k % 1000 == 0:
                    self._debug_check(k, u)
                new = scale[k] * self._rhs(u, k, epoch)
                if not self.literal_bias and k < anchor.size:
                    self.b -= (new - W[:, k]) * anchor[k]
                W[:, k] = new
        elif order == "reverse":
            # neurons below k - m are not refreshed yet in a downward sweep
            cum = np.concatenate([np.zeros((self.problem.dimension, 1)), np.cumsum(before, axis=1)], axis=1)
            for k in range(n_neurons - 1, -1, -1):
                u = self.state_at_node(k, cum[:, max(0, k - m)])
                new = scale[k] * self._rhs(u, k, epoch)
                if not self.literal_bias and k < anchor.size:
                    self.b -= (new - W[:, k]) * anchor[k]
                W[:, k] = new
        else:
            raise ValueError(f"order must be 'forward' or 'reverse', got {order!r}")

    def _debug_check(self, k, u):
        x = self.grid.points()[k]
        for l, net in enumerate(self.nets()):
            ref = eval_naive(net, x)
            if abs(ref - u[l]) > 1e-10 * (1.0 + abs(ref)):
                raise NumericalError(f"incremental state {u[l]!r} != naive {ref!r} at neuron {k}, component {l}")

    def nets(self) -> list[ShallowNet]:
        w1, b1 = self.grid.hidden_layer()
        return [ShallowNet(self.kind, w1, b1, self.W[l].copy(), self.b[l]) for l in range(self.problem.dimension)]


def nbn_train_window(problem: OdeSystem, window_start: float, window_len: float, init_state,
                     N: int, E: int, activation, *, order: str = "forward", debug: bool = False,
                     **options) -> list[ShallowNet]:
    """Train the n nets of one window for E epochs; coordinates are local, s = t - window_start."""
    if E < 1:
        raise ValueError("E must be >= 1")
    sweeper = NeuronSweeper(problem, window_start, window_len, init_state, N, activation, **options)
    for e in range(E):
        sweeper.sweep(e, order=order, debug=debug)
    return sweeper.nets()


@dataclass
class TrainedWindow:
    start: float
    length: float
    grid: StructuredGrid
    nets: list[ShallowNet]
    epoch_deltas: list[float] = field(default_factory=list)
    _evaluators: list[FastEvaluator] | None = field(default=None, init=False, repr=False)

    def evaluators(self) -> list[FastEvaluator]:
        if self._evaluators is None:
            self._evaluators = [FastEvaluator(net, self.grid) for net in self.nets]
        return self._evaluators

    def evaluate_local(self, s) -> np.ndarray:
        """Network outputs at local coordinates ``s``; shape (len(s), n)."""
        s = np.atleast_1d(np.asarray(s, dtype=np.float64))
        return np.stack([ev(s) for ev in self.evaluators()], axis=-1)

    def grid_times(self) -> np.ndarray:
        return self.start + self.grid.points()


@dataclass
class PiecewiseModel:
    """Windows in time order; evaluation dispatches each t to the window containing it."""

    windows: list[TrainedWindow]
    horizon: float

    @property
    def dimension(self) -> int:
        return len(self.windows[0].nets)

    def window_index(self, t) -> np.ndarray:
        width = self.horizon / len(self.windows)
        idx = np.floor(np.asarray(t, dtype=np.float64) / width).astype(np.int64)
        return np.clip(idx, 0, len(self.windows) - 1)

    def evaluate(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        out = np.empty((t.size, self.dimension))
        idx = self.window_index(t)
        for w in np.unique(idx):
            sel = idx == w
            win = self.windows[w]
            out[sel] = win.evaluate_local(t[sel] - win.start)
        return out

    def grid_times(self) -> np.ndarray:
        """Union of all window collocation grids, shared boundary points counted once."""
        parts = []
        for i, w in enumerate(self.windows):
            t = w.grid_times()
            if i + 1 < len(self.windows):
                t = t[t < self.windows[i + 1].start - 0.5 * w.grid.step]
            parts.append(t)
        return np.concatenate(parts)

    def boundary_jumps(self) -> np.ndarray:
        """|left window at its end - right window at its start| per boundary and component."""
        jumps = [np.abs(a.evaluate_local(a.length)[0] - b.evaluate_local(0.0)[0])
                 for a, b in zip(self.windows, self.windows[1:])]
        return np.array(jumps).reshape(-1, self.dimension)


def nbn_train(problem: OdeSystem, plan: WindowPlan, activation, *, order: str = "forward",
              debug: bool = False, **options) -> PiecewiseModel:
    """Train windows left to right, each starting from the previous window's end value."""
    width = plan.window_length(problem.horizon)
    state = problem.initial_array()
    windows = []
    for w in range(plan.window_count):
        start = w * width
        try:
            sweeper = NeuronSweeper(problem, start, width, state, plan.neurons_per_window, activation, **options)
            for e in range(plan.epochs):
                sweeper.sweep(e, order=order, debug=debug)
        except NumericalError as exc:
            raise type(exc)(f"window {w}: {exc}") from exc
        win = TrainedWindow(start, width, sweeper.grid, sweeper.nets(), list(sweeper.deltas))
        state = win.evaluate_local(width)[0]
        if not np.all(np.isfinite(state)):
            raise NumericalError(f"window {w}: non-finite end state {state.tolist()}")
        log.debug("window %d/%d done, deltas %s", w + 1, plan.window_count, sweeper.deltas)
        windows.append(win)
    return PiecewiseModel(windows, problem.horizon)
