"""Complex digamma function."""
from __future__ import annotations

import cmath
import math

import numpy as np

from .errors import PoleError

_SHIFT_TO = 10.0
# B_{2k} / (2k) for k = 1..9
_ASYMPTOTIC = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
    43867.0 / 14364.0,
)


def _digamma_scalar(z: complex) -> complex:
    z = complex(z)
    if z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real):
        raise PoleError(f"digamma has a pole at {z.real:g}")
    if z.real < 0.5:
        # reflection keeps the upward recurrence short for large negative Re z
        return _digamma_scalar(1.0 - z) - math.pi / cmath.tan(math.pi * z)
    acc = 0j
    while z.real < _SHIFT_TO:
        acc -= 1.0 / z
        z += 1.0
    inv2 = 1.0 / (z * z)
    series, power = 0j, inv2
    for c in _ASYMPTOTIC:
        series += c * power
        power *= inv2
    return acc + cmath.log(z) - 0.5 / z - series


def digamma_complex(z):
    """Digamma of a complex scalar or array.

    Upward recurrence to ``Re z >= 10`` followed by the Stirling-type
    asymptotic series; reflection handles ``Re z < 1/2``.
    """
    if np.ndim(z) == 0:
        return _digamma_scalar(z)
    arr = np.asarray(z, dtype=complex)
    return np.vectorize(_digamma_scalar, otypes=[complex])(arr)
