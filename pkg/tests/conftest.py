"""Shared brute-force oracles for the test suite.

These are deliberately written as slow, direct computations so the
library code is checked against an independent route.
"""

from __future__ import annotations

import math

import numpy as np

from holderlab.fields import ChannelField


def brute_force_seminorm(f: ChannelField, alpha: float, h_min: float, h_max: float) -> float:
    """Exhaustive scan over *all* node shift vectors with separation in range."""
    g = f.grid
    vals = f.component(0)
    best = 0.0
    for di in range(0, g.nx // 2 + 1):
        for dj in range(-(g.ny - 1), g.ny):
            if di == 0 and dj <= 0:
                continue
            r = math.hypot(di * g.hx, dj * g.hy)
            if r > h_max * (1 + 1e-12) or r < h_min * (1 - 1e-12):
                continue
            shifted = np.roll(vals, -di, axis=0)
            if dj == 0:
                d = shifted - vals
            elif dj > 0:
                d = shifted[:, dj:] - vals[:, :-dj]
            else:
                d = shifted[:, :dj] - vals[:, -dj:]
            if d.size:
                best = max(best, float(np.max(np.abs(d))) / r**alpha)
    return best


def brute_force_modulus(f: ChannelField, h: float) -> float:
    """Exhaustive modulus of continuity over all shift vectors with |shift| <= h."""
    g = f.grid
    vals = f.component(0)
    best = 0.0
    for di in range(0, g.nx // 2 + 1):
        for dj in range(-(g.ny - 1), g.ny):
            if di == 0 and dj <= 0:
                continue
            if math.hypot(di * g.hx, dj * g.hy) > h * (1 + 1e-12):
                continue
            shifted = np.roll(vals, -di, axis=0)
            if dj == 0:
                d = shifted - vals
            elif dj > 0:
                d = shifted[:, dj:] - vals[:, :-dj]
            else:
                d = shifted[:, :dj] - vals[:, -dj:]
            if d.size:
                best = max(best, float(np.max(np.abs(d))))
    return best


def fit_slope(xs, ys) -> float:
    """Plain least-squares slope."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    xm, ym = xs.mean(), ys.mean()
    return float(np.sum((xs - xm) * (ys - ym)) / np.sum((xs - xm) ** 2))
