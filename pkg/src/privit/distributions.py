"""Categorical distributions, divergences, adversarial constructions, sampling.

Distributions are explicit probability vectors over the support ``{0..n-1}``.
Datasets are summarized as per-symbol count histograms; sampling is
Poissonized (each count drawn independently as ``Poisson(m * p_i)``, which is
distributionally equivalent to drawing ``Poisson(m)`` i.i.d. samples and
costs O(n) regardless of m).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from privit.errors import (
    ConstructionError,
    DimensionMismatchError,
    DivergenceUndefinedError,
)

#: Absolute tolerance on sum(probs) == 1.
NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True)
class CategoricalDistribution:
    """Probability vector over a discrete support of size n >= 2.

    Immutable after construction; safe to share across parallel workers.
    """

    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64).copy()
        if probs.ndim != 1 or probs.size < 2:
            raise ConstructionError("need a 1-D probability vector of length >= 2")
        if np.any(probs < 0):
            raise ConstructionError("probabilities must be non-negative")
        total = float(np.sum(probs))
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ConstructionError(
                f"probabilities sum to {total!r}, outside 1 +/- {NORMALIZATION_TOL}"
            )
        probs.flags.writeable = False
        object.__setattr__(self, "probs", probs)

    @property
    def n(self) -> int:
        """Support size."""
        return int(self.probs.size)


@dataclass(frozen=True)
class Histogram:
    """Per-symbol occurrence counts of a dataset (one record = one occurrence)."""

    counts: np.ndarray
    total: int = field(init=False)

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 1:
            raise ConstructionError("need a 1-D count vector")
        if not np.issubdtype(counts.dtype, np.integer):
            as_int = counts.astype(np.int64)
            if np.any(as_int != counts):
                raise ConstructionError("counts must be integers")
            counts = as_int
        else:
            counts = counts.astype(np.int64)
        if np.any(counts < 0):
            raise ConstructionError("counts must be non-negative")
        counts.flags.writeable = False
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "total", int(np.sum(counts)))

    @property
    def n(self) -> int:
        return int(self.counts.size)


def _check_same_support(p: CategoricalDistribution, q: CategoricalDistribution):
    if p.n != q.n:
        raise DimensionMismatchError(f"support sizes differ: {p.n} vs {q.n}")


def uniform(n: int) -> CategoricalDistribution:
    """Uniform distribution over n symbols."""
    if n < 2:
        raise ConstructionError("support size must be >= 2")
    return CategoricalDistribution(np.full(n, 1.0 / n))


def tv_distance(p: CategoricalDistribution, q: CategoricalDistribution) -> float:
    """Total variation distance, half the L1 distance between the vectors."""
    _check_same_support(p, q)
    return 0.5 * float(np.sum(np.abs(p.probs - q.probs)))


def chi_square_divergence(
    p: CategoricalDistribution, q: CategoricalDistribution
) -> float:
    """Chi-square divergence sum_i (p_i - q_i)^2 / q_i.

    Defined only when q puts mass on every symbol p does.
    """
    _check_same_support(p, q)
    zero_q = q.probs == 0
    if np.any(zero_q & (p.probs > 0)):
        raise DivergenceUndefinedError("p has mass on a symbol where q is zero")
    d = p.probs - q.probs
    with np.errstate(invalid="ignore"):
        terms = np.where(zero_q, 0.0, d * d / np.where(zero_q, 1.0, q.probs))
    return float(np.sum(terms))


def paninski_construction(n: int, gamma: float) -> CategoricalDistribution:
    """Alternating (1+gamma)/n, (1-gamma)/n masses; the hardest-case
    uniformity-testing alternative, at tv distance gamma/2 from uniform(n).
    """
    if n < 2 or n % 2 != 0:
        raise ConstructionError("support size must be even and >= 2")
    if not 0.0 <= gamma <= 1.0:
        raise ConstructionError("perturbation must lie in [0, 1]")
    probs = np.empty(n)
    probs[0::2] = (1.0 + gamma) / n
    probs[1::2] = (1.0 - gamma) / n
    # Exact renormalization: last element absorbs any float residual.
    probs[-1] = 1.0 - np.sum(probs[:-1])
    return CategoricalDistribution(probs)


def two_histogram_construction(
    n: int, heavy_count: int, heavy_mass: float
) -> CategoricalDistribution:
    """Two-level distribution: ``heavy_count`` symbols share ``heavy_mass``
    uniformly, the remaining symbols share the rest uniformly.

    A proxy for very large supports: the light symbols have sub-constant
    expected occurrence counts at realistic sample sizes.
    """
    if not 0 < heavy_count < n:
        raise ConstructionError("heavy_count must satisfy 0 < heavy_count < n")
    if not 0.0 < heavy_mass < 1.0:
        raise ConstructionError("heavy_mass must lie strictly inside (0, 1)")
    probs = np.empty(n)
    probs[:heavy_count] = heavy_mass / heavy_count
    probs[heavy_count:] = (1.0 - heavy_mass) / (n - heavy_count)
    probs[-1] = 1.0 - np.sum(probs[:-1])
    return CategoricalDistribution(probs)


def heavy_block_indices(q: CategoricalDistribution) -> np.ndarray:
    """Indices of the symbols carrying the largest per-symbol mass.

    For a two-level distribution this is the non-negligible block; for a
    uniform distribution it is the whole support.
    """
    top = float(np.max(q.probs))
    return np.nonzero(q.probs >= top * (1.0 - 1e-9))[0]


def gamma_for_heavy_tv(q: CategoricalDistribution, tv_target: float) -> float:
    """Per-symbol mass shift so that perturb_on_heavy lands at the given
    tv distance from q."""
    pairs = heavy_block_indices(q).size // 2
    if pairs < 1:
        raise ConstructionError("heavy block has fewer than 2 symbols to pair")
    return tv_target / pairs


def perturb_on_heavy(q: CategoricalDistribution, gamma: float) -> CategoricalDistribution:
    """Move mass gamma between consecutive pairs of heavy-block symbols.

    Adds +gamma / -gamma alternately within the heavy block (an odd leftover
    symbol is untouched), leaving all other symbols unchanged.  The result is
    at tv distance gamma * floor(|block| / 2) from q.
    """
    if gamma < 0:
        raise ConstructionError("perturbation must be non-negative")
    block = heavy_block_indices(q)
    if gamma == 0.0:
        return CategoricalDistribution(q.probs.copy())
    if block.size < 2:
        raise ConstructionError("heavy block has fewer than 2 symbols to pair")
    probs = q.probs.copy()
    pairs = block.size // 2
    plus = block[0 : 2 * pairs : 2]
    minus = block[1 : 2 * pairs : 2]
    if np.any(probs[minus] - gamma < 0):
        raise ConstructionError("perturbation would drive a mass negative")
    probs[plus] += gamma
    probs[minus] -= gamma
    return CategoricalDistribution(probs)


def sample_poissonized(
    p: CategoricalDistribution, m: float, rng: np.random.Generator
) -> Histogram:
    """Histogram of a Poisson(m)-sized i.i.d. sample from p, drawn as
    independent per-symbol counts N_i ~ Poisson(m * p_i)."""
    if m <= 0:
        raise ConstructionError("expected sample count m must be positive")
    return Histogram(rng.poisson(m * p.probs))


# ---------------------------------------------------------------------------
# File formats (CLI): a distribution file is a text array of probabilities,
# a histogram file a text array of non-negative integers.  Both accept a JSON
# array (numbers or decimal strings) or plain whitespace/comma-separated text.
# ---------------------------------------------------------------------------


def _parse_number_array(text: str) -> list[str]:
    text = text.strip()
    if text.startswith("["):
        values = json.loads(text)
        if not isinstance(values, list):
            raise ConstructionError("expected a top-level array")
        return [str(v) for v in values]
    return text.replace(",", " ").split()

def load_distribution(path: str) -> CategoricalDistribution:
    with open(path, "r", encoding="utf-8") as fh:
        tokens = _parse_number_array(fh.read())
    try:
        probs = np.array([float(t) for t in tokens])
    except ValueError as exc:
        raise ConstructionError(f"bad probability value in {path}: {exc}") from exc
    return CategoricalDistribution(probs)


def load_histogram(path: str) -> Histogram:
    with open(path, "r", encoding="utf-8") as fh:
        tokens = _parse_number_array(fh.read())
    try:
        counts = np.array([int(t) for t in tokens], dtype=np.int64)
    except ValueError as exc:
        raise ConstructionError(f"bad count value in {path}: {exc}") from exc
    return Histogram(counts)
