"""Activation functions used by the hidden layer, with exact derivatives.

Both functions accept a float or a numpy array and return the same shape.
"""
from __future__ import annotations

import enum

import numpy as np
from scipy.special import expit


class ActivationKind(str, enum.Enum):
    SIGMOID = "sigmoid"
    RECTIFIED_SIGMOID = "resigma"

    @classmethod
    def parse(cls, value: "str | ActivationKind") -> "ActivationKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "").replace("_", "")
        aliases = {
            "sigmoid": cls.SIGMOID,
            "sigma": cls.SIGMOID,
            "resigma": cls.RECTIFIED_SIGMOID,
            "rectifiedsigmoid": cls.RECTIFIED_SIGMOID,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown activation {value!r}; expected 'sigmoid' or 'resigma'") from None


def _ret(x, out):
    return float(out) if np.ndim(x) == 0 else out


def rectified_sigmoid(x):
    """Clamped unit ramp: 0 below -1, (x + 1)/2 on [-1, 1], 1 above 1."""
    xa = np.asarray(x, dtype=np.float64)
    out = np.clip((xa + 1.0) * 0.5, 0.0, 1.0)
    return _ret(x, out)


def sigmoid(x):
    xa = np.asarray(x, dtype=np.float64)
    return _ret(x, expit(xa))


def activate(kind: ActivationKind, x):
    if kind is ActivationKind.RECTIFIED_SIGMOID:
        return rectified_sigmoid(x)
    if kind is ActivationKind.SIGMOID:
        return sigmoid(x)
    raise TypeError(f"not an ActivationKind: {kind!r}")


def activate_prime(kind: ActivationKind, x):
    """Derivative of :func:`activate` with respect to its argument.

    The rectified sigmoid is not differentiable at x = +-1; there the inner
    branch value 1/2 is returned, so a grid argument landing exactly on a kink
    still sees the ramp slope.
    """
    xa = np.asarray(x, dtype=np.float64)
    if kind is ActivationKind.RECTIFIED_SIGMOID:
        out = np.where(np.abs(xa) <= 1.0, 0.5, 0.0)
    elif kind is ActivationKind.SIGMOID:
        s = expit(xa)
        out = s * (1.0 - s)
    else:
        raise TypeError(f"not an ActivationKind: {kind!r}")
    return _ret(x, out)
