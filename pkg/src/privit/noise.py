"""Laplace noise, the Laplace mechanism, and the filter threshold formulas.

All logarithms are natural.  Laplace draws go through the inverse CDF of a
single uniform draw, so a seeded generator reproduces them exactly and there
is no rejection loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from privit import _kernels
from privit.distributions import Histogram
from privit.errors import ConfigError


@dataclass(frozen=True)
class NoiseVector:
    """One Laplace draw per heavy symbol, tagged with its scale parameter."""

    values: np.ndarray
    scale: float


def laplace_vector(scale: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """size i.i.d. draws from Laplace(scale) via inverse-CDF."""
    if scale <= 0:
        raise ConfigError("Laplace scale must be positive")
    return _kernels.laplace_from_uniform(rng.random(size), scale)


def laplace_sample(scale: float, rng: np.random.Generator) -> float:
    """One draw from the Laplace distribution with density exp(-|x|/b)/(2b)."""
    return float(laplace_vector(scale, 1, rng)[0])


def sample_noise_vector(
    scale: float, size: int, rng: np.random.Generator
) -> NoiseVector:
    return NoiseVector(values=laplace_vector(scale, size, rng), scale=scale)


def laplace_mechanism(
    h: Histogram, epsilon: float, rng: np.random.Generator
) -> np.ndarray:
    """Counts plus i.i.d. Laplace(1/epsilon) noise, the classic private release.

    The output is (epsilon, 0)-differentially private when one record moves
    one unit of one count.
    """
    if epsilon <= 0:
        raise ConfigError("epsilon must be positive")
    return h.counts + laplace_vector(1.0 / epsilon, h.n, rng)


def laplace_threshold(c2: float, epsilon: float, a_size: int) -> float:
    """Cutoff L with P(max of a_size |Laplace(2/(c2 eps))| draws >= L) = c2.

    Evaluates (2/(c2 eps)) * ln(1 / (1 - (1 - c2)^(1/a_size))) through
    expm1/log1p so the nested survival-function inverse stays accurate for
    large a_size.
    """
    if not 0.0 < c2 < 1.0:
        raise ConfigError("c2 must lie strictly inside (0, 1)")
    if epsilon <= 0:
        raise ConfigError("epsilon must be positive")
    if a_size < 1:
        raise ConfigError("a_size must be >= 1")
    # 1 - (1 - c2)^(1/a) == -expm1(log1p(-c2) / a)
    inner = -math.expm1(math.log1p(-c2) / a_size)
    return -(2.0 / (c2 * epsilon)) * math.log(inner)


def poisson_deviation_bound(m: float, q_i: float, n: int) -> float:
    """Per-symbol count deviation allowance max{4 sqrt(m q_i ln n), ln n}.

    A Poisson(m q_i) count stays within this of its mean for all heavy
    symbols simultaneously, except with probability O(n^-0.84).
    """
    if m <= 0:
        raise ConfigError("m must be positive")
    if q_i < 0:
        raise ConfigError("q_i must be non-negative")
    if n < 2:
        raise ConfigError("n must be >= 2")
    log_n = math.log(n)
    return max(4.0 * math.sqrt(m * q_i * log_n), log_n)


def deviation_limits(m: float, q_probs: np.ndarray, n: int, threshold: float) -> np.ndarray:
    """Vector of filter cutoffs L + max{4 sqrt(m q_i ln n), ln n} per symbol."""
    log_n = math.log(n)
    return threshold + np.maximum(4.0 * np.sqrt(m * q_probs * log_n), log_n)
