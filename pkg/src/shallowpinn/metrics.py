"""Accuracy measures: relative L2 error and absolute error series."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateReferenceError


@dataclass(frozen=True)
class ErrorVector:
    per_component: tuple[float, ...]
    eval_points: int

    def __post_init__(self):
        for e in self.per_component:
            if not (math.isfinite(e) and e >= 0):
                raise ValueError(f"invalid error entry {e!r}")


def _pair(pred, ref):
    p = np.asarray(pred, dtype=np.float64).ravel()
    r = np.asarray(ref, dtype=np.float64).ravel()
    if p.shape != r.shape:
        raise ValueError(f"length mismatch: {p.size} predictions vs {r.size} references")
    return p, r


def _scaled_norm(v: np.ndarray) -> tuple[float, int]:
    """(m, e) with ||v||_2 = m * 2**e; the power-of-two scaling is exact."""
    top = float(np.max(np.abs(v)))
    if top == 0.0:
        return 0.0, 0
    _, e = math.frexp(top)
    w = np.ldexp(v, -e)
    return math.sqrt(math.fsum((w * w).tolist())), e


def relative_l2(pred, ref) -> float:
    """sqrt(sum (pred - ref)^2) / sqrt(sum ref^2).

    The 1/N_e normalisations of the RMS form cancel. Sums use ``math.fsum``
    on power-of-two rescaled values, so squares neither underflow nor overflow.
    """
    p, r = _pair(pred, ref)
    if p.size == 0:
        raise ValueError("empty series")
    if not (np.all(np.isfinite(p)) and np.all(np.isfinite(r))):
        raise ValueError("series contain non-finite values")
    den, e_den = _scaled_norm(r)
    if den == 0.0:
        raise DegenerateReferenceError("reference series is identically zero")
    num, e_num = _scaled_norm(p - r)
    return math.ldexp(num / den, e_num - e_den)


def abs_error_series(pred, ref) -> np.ndarray:
    p, r = _pair(pred, ref)
    return np.abs(p - r)


def relative_l2_components(pred: np.ndarray, ref: np.ndarray) -> ErrorVector:
    """Column-wise relative L2 errors of two (points x components) arrays."""
    pred = np.asarray(pred, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if pred.shape != ref.shape or pred.ndim != 2:
        raise ValueError(f"shape mismatch {pred.shape} vs {ref.shape}")
    return ErrorVector(tuple(relative_l2(pred[:, l], ref[:, l]) for l in range(pred.shape[1])),
                       pred.shape[0])
