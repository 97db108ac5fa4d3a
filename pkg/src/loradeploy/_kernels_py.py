"""Pure-Python/numpy implementations of the hot kernels.

Signatures mirror ``_kernels.pyx`` exactly; ``loradeploy.kernels`` picks one
of the two at import time.
"""

from __future__ import annotations

import math

import numpy as np

SERIES_TOL = 1e-16
MAX_TERMS = 200_000


def hyp2f1(a: float, b: float, c: float, x: float) -> float:
    """Gauss 2F1(a, b; c; x) for x <= 0, NaN if the series does not converge.

    Pfaff maps x <= 0 onto y = x/(x-1) in [0, 1), where the power series
    converges absolutely.
    """
    if x > 0.0:
        return math.nan
    if x == 0.0 or a == 0.0:
        return 1.0
    y = x / (x - 1.0)
    cb = c - b
    s = 1.0
    t = 1.0
    for k in range(MAX_TERMS):
        ratio = (a + k) * (cb + k) / ((c + k) * (k + 1.0)) * y
        t *= ratio
        s += t
        if t == 0.0:
            break
        if abs(t) <= SERIES_TOL * abs(s) and abs(ratio) < 1.0:
            break
    else:
        return math.nan
    return s * (1.0 - x) ** (-a)


def hyp2f1_array(a: float, b: float, c: float, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.full(x.shape, np.nan)
    flat_x = x.ravel()
    flat_out = out.ravel()
    ok = flat_x <= 0.0
    xv = flat_x[ok]
    y = xv / (xv - 1.0)
    s = np.ones_like(xv)
    t = np.ones_like(xv)
    active = np.ones(xv.shape, dtype=bool)
    if a == 0.0:
        active[:] = False
    cb = c - b
    for k in range(MAX_TERMS):
        if not active.any():
            break
        ratio = (a + k) * (cb + k) / ((c + k) * (k + 1.0)) * y
        t = np.where(active, t * ratio, 0.0)
        s += t
        done = (t == 0.0) | ((np.abs(t) <= SERIES_TOL * np.abs(s)) & (np.abs(ratio) < 1.0))
        active &= ~done
    s[active] = np.nan
    flat_out[ok] = s * (1.0 - xv) ** (-a)
    return out


def segment_log1p_sum(values: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """Sum of log1p(values) over each segment [offsets[i], offsets[i+1])."""
    values = np.asarray(values, dtype=float)
    offsets = np.asarray(offsets, dtype=np.int64)
    cs = np.concatenate(([0.0], np.cumsum(np.log1p(values))))
    return cs[offsets[1:]] - cs[offsets[:-1]]


def timeline_collisions(
    starts: np.ndarray, tau_k: float, t_hat: np.ndarray, tau_i: float
) -> int:
    """Count probe instants whose window [t, t+tau_i) meets an interferer burst.

    ``starts`` are the sorted burst start times of the interfering stream (each
    burst lasts ``tau_k``); every probe must satisfy
    ``starts[0] <= t < starts[-1]``.
    """
    starts = np.asarray(starts, dtype=float)
    t_hat = np.asarray(t_hat, dtype=float)
    j = np.searchsorted(starts, t_hat, side="right") - 1
    hit = (t_hat < starts[j] + tau_k) | (t_hat + tau_i > starts[j + 1])
    return int(np.count_nonzero(hit))
