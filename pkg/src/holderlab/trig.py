"""Trigonometric helpers with exact dyadic argument reduction.

``sinpi(t)`` evaluates sin(pi*t) by reducing t modulo 2 *before*
multiplying by pi.  For dyadic rationals t = j/2**m the reduction steps
(fmod by 2, subtracting 1, folding about 1/2) are all exact in binary
floating point, so zeros at integer t and unit magnitudes at
half-integer t are hit exactly rather than to ~1e-16.  The lacunary
series and the resonant trace identities lean on this: terms such as
sin(2**(k-n) * pi) must vanish exactly for k >= n.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["sinpi", "cospi", "sinpi_array", "cospi_array"]


def sinpi(t: float) -> float:
    """sin(pi*t), exact at dyadic multiples of 1/2."""
    r = math.fmod(t, 2.0)
    if r < 0.0:
        r += 2.0
    sign = 1.0
    if r >= 1.0:
        # exact for r in [1, 2) by Sterbenz
        r -= 1.0
        sign = -1.0
    if r > 0.5:
        r = 1.0 - r
    if r == 0.0:
        return 0.0
    if r == 0.5:
        return sign
    return sign * math.sin(math.pi * r)


def cospi(t: float) -> float:
    """cos(pi*t), exact at dyadic multiples of 1/2.

    Valid for |t| < 2**51 (t + 1/2 must be representable).
    """
    return sinpi(t + 0.5)


def sinpi_array(t) -> np.ndarray:
    """Vectorised :func:`sinpi`."""
    r = np.mod(np.asarray(t, dtype=float), 2.0)
    sign = np.where(r >= 1.0, -1.0, 1.0)
    r = np.where(r >= 1.0, r - 1.0, r)
    r = np.where(r > 0.5, 1.0 - r, r)
    out = np.sin(np.pi * r)
    out = np.where(r == 0.5, 1.0, out)
    return sign * out


def cospi_array(t) -> np.ndarray:
    """Vectorised :func:`cospi`."""
    return sinpi_array(np.asarray(t, dtype=float) + 0.5)
