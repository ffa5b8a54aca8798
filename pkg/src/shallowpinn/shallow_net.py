"""Single-hidden-layer scalar networks and their evaluators.

A network maps a scalar coordinate x to

    b2 + sum_k W2[k] * act(W1[k] * x + b1[k])

Three evaluators are provided. ``eval_naive`` is the plain O(N) sum and
serves as the semantic reference. ``eval_fast`` exploits saturation of
neurons laid out on a uniform grid and touches only a few neurons per
point. ``eval_deriv`` returns the exact derivative in x.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .activation import ActivationKind, activate, activate_prime
from .errors import GridMismatchError

#: Sigmoid arguments beyond this magnitude are treated as fully saturated.
SIGMOID_CUTOFF = 37.0

SIGMOID_HALF_WIDTH = math.log(2.0 + math.sqrt(3.0)) / 2.0
RESIGMA_HALF_WIDTH = 1.0

# Points per block for the dense evaluators; bounds the (points x neurons) temporaries.
_BLOCK_ELEMENTS = 1 << 22


def half_width(kind: ActivationKind) -> float:
    """Activation-argument spacing between neighbouring neurons, halved."""
    if kind is ActivationKind.RECTIFIED_SIGMOID:
        return RESIGMA_HALF_WIDTH
    return SIGMOID_HALF_WIDTH


@dataclass
class ShallowNet:
    activation: ActivationKind
    hidden_weights: np.ndarray
    hidden_biases: np.ndarray
    output_weights: np.ndarray
    output_bias: float

    def __post_init__(self):
        self.activation = ActivationKind.parse(self.activation)
        self.hidden_weights = np.array(self.hidden_weights, dtype=np.float64, ndmin=1)
        self.hidden_biases = np.array(self.hidden_biases, dtype=np.float64, ndmin=1)
        self.output_weights = np.array(self.output_weights, dtype=np.float64, ndmin=1)
        self.output_bias = float(self.output_bias)
        n = self.hidden_weights.shape[0]
        if n < 1:
            raise ValueError("a network needs at least one hidden neuron")
        for name in ("hidden_weights", "hidden_biases", "output_weights"):
            arr = getattr(self, name)
            if arr.shape != (n,):
                raise ValueError(f"{name} has shape {arr.shape}, expected ({n},)")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite values")
        if not math.isfinite(self.output_bias):
            raise ValueError("output_bias is not finite")

    @property
    def n_neurons(self) -> int:
        return self.hidden_weights.shape[0]

    def copy(self) -> "ShallowNet":
        return ShallowNet(self.activation, self.hidden_weights.copy(), self.hidden_biases.copy(),
                          self.output_weights.copy(), self.output_bias)


@dataclass(frozen=True)
class StructuredGrid:
    """Uniform collocation grid with one neuron centred on each point.

    Neuron k is centred at ``origin + k * step``; its argument changes by
    ``2 * half_width`` between neighbouring grid points.
    """

    origin: float
    step: float
    count: int
    half_width: float

    def __post_init__(self):
        if not (self.step > 0 and math.isfinite(self.step)):
            raise ValueError(f"grid step must be positive and finite, got {self.step}")
        if self.count < 1:
            raise ValueError(f"grid count must be >= 1, got {self.count}")
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")

    @classmethod
    def for_activation(cls, kind: ActivationKind, length: float, count: int,
                       origin: float = 0.0) -> "StructuredGrid":
        """Grid of ``count`` neurons covering ``[origin, origin + length)`` with step length/count."""
        return cls(origin=float(origin), step=float(length) / count, count=int(count),
                   half_width=half_width(ActivationKind.parse(kind)))

    def points(self) -> np.ndarray:
        return self.origin + self.step * np.arange(self.count, dtype=np.float64)

    @property
    def hidden_weight(self) -> float:
        return 2.0 * self.half_width / self.step

    def hidden_biases(self) -> np.ndarray:
        k = np.arange(self.count, dtype=np.float64)
        return -2.0 * self.half_width * (k + self.origin / self.step)

    def hidden_layer(self) -> tuple[np.ndarray, np.ndarray]:
        return np.full(self.count, self.hidden_weight), self.hidden_biases()


def _as_points(x):
    return np.atleast_1d(np.asarray(x, dtype=np.float64)).ravel()


def _ret(x, out):
    return float(out[0]) if np.ndim(x) == 0 else out.reshape(np.shape(x))


def eval_naive(net: ShallowNet, x):
    """Reference evaluation: every neuron, accumulated left to right in index order."""
    pts = _as_points(x)
    out = np.empty_like(pts)
    rows = max(1, _BLOCK_ELEMENTS // net.n_neurons)
    for lo in range(0, pts.size, rows):
        p = pts[lo:lo + rows, None]
        terms = net.output_weights * activate(net.activation, net.hidden_weights * p + net.hidden_biases)
        # add.accumulate is strictly sequential, unlike the pairwise np.sum
        out[lo:lo + rows] = np.add.accumulate(terms, axis=1)[:, -1] + net.output_bias
    return _ret(x, out)


def eval_deriv(net: ShallowNet, x):
    """d/dx of the network output."""
    pts = _as_points(x)
    out = np.empty_like(pts)
    rows = max(1, _BLOCK_ELEMENTS // net.n_neurons)
    scale = net.hidden_weights * net.output_weights
    for lo in range(0, pts.size, rows):
        p = pts[lo:lo + rows, None]
        out[lo:lo + rows] = (scale * activate_prime(net.activation, net.hidden_weights * p + net.hidden_biases)).sum(axis=1)
    return _ret(x, out)


def prefix_sums(net: ShallowNet) -> np.ndarray:
    """Running sums of the output weights, ``prefix[j] = sum(W2[:j])``, length N + 1.

    Neumaier-compensated so that long prefixes keep full precision.
    """
    w = net.output_weights.tolist()
    out = [0.0] * (len(w) + 1)
    total = 0.0
    comp = 0.0
    for i, v in enumerate(w):
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
        out[i + 1] = total + comp
    return np.array(out)


def local_half_window(kind: ActivationKind, grid: StructuredGrid) -> int:
    """How many neighbours on each side of the nearest neuron are summed explicitly."""
    if kind is ActivationKind.RECTIFIED_SIGMOID:
        return 1
    return int(math.ceil(SIGMOID_CUTOFF / (2.0 * grid.half_width) + 0.5))


def check_grid(net: ShallowNet, grid: StructuredGrid, full: bool = True) -> None:
    """Raise :class:`GridMismatchError` unless ``net``'s hidden layer sits on ``grid``."""
    if net.n_neurons != grid.count:
        raise GridMismatchError(f"net has {net.n_neurons} neurons but grid has {grid.count} points")
    if abs(grid.half_width - half_width(net.activation)) > 1e-12:
        raise GridMismatchError("grid half-width does not match the net's activation")
    w1, b1 = grid.hidden_layer()
    if full:
        sel = slice(None)
    else:
        sel = [0, grid.count - 1]
    tol = 1e-9
    if not np.allclose(net.hidden_weights[sel], w1[sel], rtol=tol, atol=0.0):
        raise GridMismatchError("hidden weights do not match the grid")
    if not np.allclose(net.hidden_biases[sel], b1[sel], rtol=tol, atol=tol * (1.0 + abs(b1[-1]))):
        raise GridMismatchError("hidden biases do not match the grid")


def eval_fast(net: ShallowNet, grid: StructuredGrid, prefix: np.ndarray, x):
    """Saturation-aware evaluation in O(1) per point.

    Neurons well to the left of ``x`` are saturated at 1 and enter through
    ``prefix``; neurons well to the right contribute nothing. Only the few
    neurons around the nearest grid point are evaluated explicitly.
    """
    check_grid(net, grid, full=False)
    n = grid.count
    if len(prefix) != n + 1:
        raise GridMismatchError(f"prefix has length {len(prefix)}, expected {n + 1}")
    m = local_half_window(net.activation, grid)
    pts = _as_points(x)
    s = (pts - grid.origin) / grid.step
    s = np.clip(s, -m - 2.0, n + m + 2.0)
    j = np.floor(s + 0.5).astype(np.int64)
    idx = j[:, None] + np.arange(-m, m + 1)
    valid = (idx >= 0) & (idx < n)
    idc = np.clip(idx, 0, n - 1)
    args = net.hidden_weights[idc] * pts[:, None] + net.hidden_biases[idc]
    local = np.where(valid, net.output_weights[idc] * activate(net.activation, args), 0.0)
    lo = np.clip(j - m, 0, n)
    out = net.output_bias + prefix[lo] + local.sum(axis=1)
    return _ret(x, out)


@dataclass
class FastEvaluator:
    """Bundles a net, its grid and a prefix snapshot.

    The prefix is taken at construction; build a new evaluator after the
    output weights change.
    """

    net: ShallowNet
    grid: StructuredGrid
    prefix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        check_grid(self.net, self.grid, full=True)
        self.prefix = prefix_sums(self.net)

    def __call__(self, x):
        return eval_fast(self.net, self.grid, self.prefix, x)
