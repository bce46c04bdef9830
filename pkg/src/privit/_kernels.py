"""Hot numeric kernels with selectable numpy/numba backends.

The statistic sums, the per-symbol filter check, and the inverse-CDF Laplace
transform dominate the runtime of Monte Carlo trial loops.  Each kernel has a
pure-numpy implementation here and an ``@njit`` twin in ``_kernels_numba``.

Backend selection, at import time, via the environment variable
``PRIVIT_BACKEND``:

* ``auto`` (default) - numba when importable, numpy otherwise;
* ``numba``          - require numba, raise if unavailable;
* ``numpy``          - force the pure-numpy path.

Both backends are always reachable through :func:`get_backend` (used by the
parity tests and ``benchmarks/bench_backends.py``); the module-level names
are bound to the active one.
"""

from __future__ import annotations

import os
from types import SimpleNamespace

import numpy as np

BACKEND_ENV = "PRIVIT_BACKEND"

# |u - 1/2| is clamped just below 1/2 so a once-in-2^53 uniform draw of
# exactly 0.0 cannot produce an infinite noise value.
_HALF_OPEN = np.nextafter(0.5, 0.0)


def _laplace_from_uniform_np(u, scale):
    """Map uniform draws on [0, 1) to Laplace(scale) via the quantile function."""
    u = np.asarray(u, dtype=np.float64)
    w = u - 0.5
    a = np.minimum(np.abs(w), _HALF_OPEN)
    return -scale * np.sign(w) * np.log1p(-2.0 * a)


def _chisq_sum_np(values, expected):
    """sum_i ((v_i - e_i)^2 - v_i) / e_i for 1-D arrays."""
    d = values - expected
    return float(np.sum((d * d - values) / expected))


def _chisq_sum_rows_np(values, expected):
    """Row-wise chisq_sum for a (rows, k) matrix against a length-k expectation."""
    d = values - expected
    return np.sum((d * d - values) / expected, axis=1)


def _filter_breach_np(counts, noise, expected, limits):
    """True when any |counts_i + noise_i - expected_i| >= limits_i."""
    return bool(np.any(np.abs(counts + noise - expected) >= limits))


def _max_abs_np(values):
    return float(np.max(np.abs(values)))


_NUMPY = SimpleNamespace(
    name="numpy",
    laplace_from_uniform=_laplace_from_uniform_np,
    chisq_sum=_chisq_sum_np,
    chisq_sum_rows=_chisq_sum_rows_np,
    filter_breach=_filter_breach_np,
    max_abs=_max_abs_np,
)

_BACKENDS = {"numpy": _NUMPY}

try:
    from privit import _kernels_numba as _nb

    _BACKENDS["numba"] = SimpleNamespace(
        name="numba",
        laplace_from_uniform=_nb.laplace_from_uniform,
        chisq_sum=_nb.chisq_sum,
        chisq_sum_rows=_nb.chisq_sum_rows,
        filter_breach=_nb.filter_breach,
        max_abs=_nb.max_abs,
    )
except ImportError:  # numba not installed; numpy path stays available
    _nb = None


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def get_backend(name: str) -> SimpleNamespace:
    """Return a specific backend namespace regardless of the active choice."""
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(
            f"unknown or unavailable backend {name!r}; available: {available_backends()}"
        ) from None


def _resolve_active() -> SimpleNamespace:
    choice = os.environ.get(BACKEND_ENV, "auto").strip().lower()
    if choice in ("", "auto"):
        return _BACKENDS.get("numba", _NUMPY)
    if choice in _BACKENDS:
        return _BACKENDS[choice]
    if choice == "numba":
        raise ImportError(
            f"{BACKEND_ENV}=numba requested but numba is not importable"
        )
    raise ValueError(
        f"{BACKEND_ENV} must be one of 'auto', 'numpy', 'numba'; got {choice!r}"
    )


_ACTIVE = _resolve_active()


def active_backend() -> str:
    """Name of the backend the module-level kernels are bound to."""
    return _ACTIVE.name


laplace_from_uniform = _ACTIVE.laplace_from_uniform
chisq_sum = _ACTIVE.chisq_sum
chisq_sum_rows = _ACTIVE.chisq_sum_rows
filter_breach = _ACTIVE.filter_breach
max_abs = _ACTIVE.max_abs
