"""Independent reference computations used by the tests.

Nothing here imports the package's numerical kernels; each oracle is written
from the defining formulas in exact or extended precision.
"""
from __future__ import annotations

from fractions import Fraction

import mpmath as mp


def resigma_relu_exact(x: float) -> float:
    """[ReLU(x+1) - ReLU(x-1)] / 2 in exact rational arithmetic, rounded once to float."""
    q = Fraction(x)
    relu = lambda y: y if y > 0 else Fraction(0)
    return float((relu(q + 1) - relu(q - 1)) / 2)


def sigmoid_prime_mp(x):
    s = 1 / (1 + mp.exp(-mp.mpf(x)))
    return s * (1 - s)


def delta_zeta_mp():
    return mp.log(2 + mp.sqrt(3)) / 2


def kappa_mp(k: int, n_total: int, L: int):
    dz = delta_zeta_mp()
    lo, hi = max(0, k - L), min(n_total - 1, k + L)
    return mp.fsum(sigmoid_prime_mp(2 * dz * (k - m)) for m in range(lo, hi + 1))


def slingshot_rhs_mp(state, t, *, epsilon=4 * mp.pi, foil=mp.mpf("0.02") * mp.pi, period=1, duration=4, a0=1):
    """Right-hand side of the slingshot system written out term by term with mpmath."""
    h, x, y, z = (mp.mpf(v) for v in state)
    t = mp.mpf(t)
    if 0 <= t <= duration:
        env = mp.sin(mp.pi * t / duration) ** 2
        ay = a0 * mp.sin(2 * mp.pi * t / period) * env
        az = a0 * mp.cos(2 * mp.pi * t / period) * env
    else:
        ay = az = mp.mpf(0)
    uy = ay - epsilon * y
    uz = az - epsilon * z
    up2 = uy ** 2 + uz ** 2
    b = (1 + up2 - h ** 2) / (2 * h ** 2)
    ex = epsilon * mp.tanh(x / (4 * foil))
    return [(ex - epsilon * up2 / (1 + up2)) / (1 + b),
            b / (1 + b),
            uy / (h * (1 + b)),
            uz / (h * (1 + b))]


def relative_l2_exact(pred, ref) -> float:
    """Relative L2 error with exact rational sums and an mpmath square root."""
    num = sum((Fraction(p) - Fraction(r)) ** 2 for p, r in zip(pred, ref))
    den = sum(Fraction(r) ** 2 for r in ref)
    with mp.workdps(50):
        val = mp.sqrt(mp.mpf(num.numerator) / num.denominator) / mp.sqrt(mp.mpf(den.numerator) / den.denominator)
        return float(val)


def brute_force_net(x, w1, b1, w2, b2, act):
    """Plain Python loop over neurons; ``act`` is a scalar callable."""
    total = 0.0
    for a, b, w in zip(w1, b1, w2):
        total += w * act(a * x + b)
    return b2 + total
