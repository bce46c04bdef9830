"""Numba twins of the kernels in ``_kernels``.

Loops are written out explicitly; formulas must stay in lockstep with the
numpy implementations (the parity tests compare both backends element-wise).
"""

import numpy as np
from numba import njit

_HALF_OPEN = np.nextafter(0.5, 0.0)


@njit(cache=True)
def laplace_from_uniform(u, scale):
    out = np.empty(u.shape[0], dtype=np.float64)
    for i in range(u.shape[0]):
        w = u[i] - 0.5
        a = abs(w)
        if a > _HALF_OPEN:
            a = _HALF_OPEN
        out[i] = -scale * np.sign(w) * np.log1p(-2.0 * a)
    return out


@njit(cache=True)
def chisq_sum(values, expected):
    s = 0.0
    for i in range(values.shape[0]):
        d = values[i] - expected[i]
        s += (d * d - values[i]) / expected[i]
    return s


@njit(cache=True)
def chisq_sum_rows(values, expected):
    rows = values.shape[0]
    out = np.empty(rows, dtype=np.float64)
    for r in range(rows):
        s = 0.0
        for i in range(values.shape[1]):
            d = values[r, i] - expected[i]
            s += (d * d - values[r, i]) / expected[i]
        out[r] = s
    return out


@njit(cache=True)
def filter_breach(counts, noise, expected, limits):
    for i in range(counts.shape[0]):
        if abs(counts[i] + noise[i] - expected[i]) >= limits[i]:
            return True
    return False


@njit(cache=True)
def max_abs(values):
    m = 0.0
    for i in range(values.shape[0]):
        a = abs(values[i])
        if a > m:
            m = a
    return m
