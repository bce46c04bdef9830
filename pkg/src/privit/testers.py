"""The identity-test procedures.

Five testers share one decision problem: given an explicit q and samples from
an unknown p, output "p = q" or "p != q".

* :func:`privit` - the flagship private tester: a data-independent early
  return, a noisy per-symbol filter, then a Bernoulli draw on the clamped
  chi-square statistic.
* :func:`privit_noised` - variant that releases the statistic itself with
  Laplace noise and thresholds it against a Monte-Carlo-calibrated cutoff.
* :func:`adk_chisq` - the non-private chi-square-style tester.
* :func:`laplaced_chisq` - the naive private baseline: noise every count,
  then threshold the same statistic.
* :func:`repetition_wrapper` - the folklore privatization of any non-private
  tester by dataset repetition and random selection.

All testers are pure functions of (inputs, generator); a fixed seed fixes the
verdict.  Parallel trial loops must hand each trial its own generator.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from privit import _kernels
from privit.distributions import (
    CategoricalDistribution,
    Histogram,
    sample_poissonized,
)
from privit.errors import ConfigError, DimensionMismatchError
from privit.noise import (
    deviation_limits,
    laplace_sample,
    laplace_threshold,
    laplace_vector,
    poisson_deviation_bound,
)
from privit.theory import (
    C1_DEFAULT,
    C2_DEFAULT,
    amplification_factor,
    privit_strict_minimum,
    zprime_null_mean,
)


class Outcome(enum.Enum):
    EQUAL = "p = q"
    NOT_EQUAL = "p != q"


class Branch(enum.Enum):
    """Which stage of a tester produced the verdict.

    BERNOULLI_STEP marks the final statistic stage (named for the flagship
    tester's randomized-rounding step; threshold-style testers report it for
    their statistic comparison as well).
    """

    EARLY_RETURN = "early-return"
    FILTER_REJECT = "filter-reject"
    BERNOULLI_STEP = "bernoulli-step"


@dataclass(frozen=True)
class Verdict:
    outcome: Outcome
    branch: Branch
    statistic: float | None = None

    def __post_init__(self):
        if self.branch is Branch.FILTER_REJECT and self.outcome is not Outcome.NOT_EQUAL:
            raise ValueError("a filter rejection always reports p != q")


@dataclass(frozen=True)
class TestParams:
    """Configuration bundle for one test run.

    ``m`` is the expected sample count of the Poissonized draw.  With
    ``strict=True`` construction fails when m sits below the floor that the
    flagship tester's privacy argument needs; running anyway would void the
    guarantee.
    """

    n: int
    alpha: float
    epsilon: float
    m: float
    beta_I: float = 1.0 / 3.0
    beta_II: float = 1.0 / 3.0
    c1: float = C1_DEFAULT
    c2: float = C2_DEFAULT
    strict: bool = False

    def __post_init__(self):
        if self.n < 2:
            raise ConfigError("n must be >= 2")
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigError("alpha must lie in (0, 1]")
        if self.epsilon <= 0:
            raise ConfigError("epsilon must be positive")
        if self.m <= 0:
            raise ConfigError("m must be positive")
        for name in ("beta_I", "beta_II"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ConfigError(f"{name} must lie strictly inside (0, 1)")
        if self.c1 <= 0 or not 0.0 < self.c2 < 1.0:
            raise ConfigError("c1 must be positive and c2 inside (0, 1)")
        if self.strict:
            floor = privit_strict_minimum(
                self.n, self.alpha, self.epsilon, c1=self.c1, c2=self.c2
            )
            if self.m < floor:
                raise ConfigError(
                    f"strict mode: m={self.m} is below the privacy floor {floor:.1f}"
                )


PSource = Union[CategoricalDistribution, Histogram]


def heavy_set(q: CategoricalDistribution, alpha: float, c1: float) -> np.ndarray:
    """Indices of symbols with q_i >= c1 alpha / n.

    Symbols below the cutoff carry total mass < c1 alpha and are ignored by
    the filter and the statistic; the set is never empty.
    """
    cutoff = c1 * alpha / q.n
    idx = np.nonzero(q.probs >= cutoff)[0]
    assert idx.size > 0
    return idx


def chisq_statistic(
    q: CategoricalDistribution,
    counts: Histogram | np.ndarray,
    params: TestParams,
    normalized: bool = True,
) -> float:
    """The heavy-set chi-square-style statistic of a count vector.

    sum over heavy i of ((N_i - m q_i)^2 - N_i) / (m q_i), times
    2/(m alpha^2) when ``normalized``.  Mean 0 under p = q; at least 1 (after
    normalization) when p is alpha-far from q in total variation.
    """
    counts = counts.counts if isinstance(counts, Histogram) else np.asarray(counts)
    if counts.size != q.n:
        raise DimensionMismatchError(f"histogram length {counts.size} != support {q.n}")
    heavy = heavy_set(q, params.alpha, params.c1)
    values = counts[heavy].astype(np.float64)
    expected = params.m * q.probs[heavy]
    raw = _kernels.chisq_sum(values, expected)
    if not normalized:
        return raw
    return 2.0 / (params.m * params.alpha**2) * raw


def _resolve_counts(
    q: CategoricalDistribution, p_source: PSource, m: float, rng: np.random.Generator
) -> np.ndarray:
    """Sample a Poissonized histogram, or take a supplied one as such a draw."""
    if isinstance(p_source, Histogram):
        if p_source.n != q.n:
            raise DimensionMismatchError(
                f"histogram length {p_source.n} != support {q.n}"
            )
        return p_source.counts
    if isinstance(p_source, CategoricalDistribution):
        if p_source.n != q.n:
            raise DimensionMismatchError(
                f"p support {p_source.n} != q support {q.n}"
            )
        return sample_poissonized(p_source, m, rng).counts
    raise ConfigError(f"p_source must be a distribution or a histogram, got {type(p_source)!r}")


def _coin_verdict(rng: np.random.Generator, branch: Branch) -> Verdict:
    outcome = Outcome.NOT_EQUAL if rng.random() < 0.5 else Outcome.EQUAL
    return Verdict(outcome=outcome, branch=branch)


def privit(
    q: CategoricalDistribution,
    p_source: PSource,
    params: TestParams,
    rng: np.random.Generator,
) -> Verdict:
    """The flagship private identity tester.

    1. Draw Y_i ~ Laplace(2/(c2 eps)) for every heavy symbol, *before* any
       data is touched; if any |Y_i| reaches the threshold L, return a fair
       coin flip.  This fires with probability exactly c2 independent of the
       data and floors every output's probability at c2/2.
    2. Obtain counts (a Poissonized draw from p, or the caller's histogram).
    3. Filter: reject if any heavy |N_i + Y_i - m q_i| reaches
       L + max{4 sqrt(m q_i ln n), ln n}; blatant discrepancies exit here,
       and surviving count vectors keep the statistic low-sensitivity.
    4. Compute Z = (2/(m alpha^2)) sum_heavy ((N_i - m q_i)^2 - N_i)/(m q_i),
       clamp to [0, 1], and answer "p != q" with that probability.
    """
    if q.n != params.n:
        raise ConfigError(f"params.n={params.n} does not match q's support {q.n}")
    heavy = heavy_set(q, params.alpha, params.c1)
    scale = 2.0 / (params.c2 * params.epsilon)
    noise = laplace_vector(scale, heavy.size, rng)
    threshold = laplace_threshold(params.c2, params.epsilon, heavy.size)
    if _kernels.max_abs(noise) >= threshold:
        return _coin_verdict(rng, Branch.EARLY_RETURN)

    counts = _resolve_counts(q, p_source, params.m, rng)
    heavy_counts = counts[heavy].astype(np.float64)
    expected = params.m * q.probs[heavy]
    limits = deviation_limits(params.m, q.probs[heavy], params.n, threshold)
    if _kernels.filter_breach(heavy_counts, noise, expected, limits):
        return Verdict(outcome=Outcome.NOT_EQUAL, branch=Branch.FILTER_REJECT)

    z = 2.0 / (params.m * params.alpha**2) * _kernels.chisq_sum(heavy_counts, expected)
    t = min(max(z, 0.0), 1.0)
    rejected = rng.random() < t
    return Verdict(
        outcome=Outcome.NOT_EQUAL if rejected else Outcome.EQUAL,
        branch=Branch.BERNOULLI_STEP,
        statistic=z,
    )


def noised_sensitivity_bound(q: CategoricalDistribution, params: TestParams) -> float:
    """Worst-case change of the unnormalized statistic across filter-passing
    neighboring datasets: max over heavy i of
    (2/(m q_i)) (2 L + max{4 sqrt(m q_i ln n), ln n} + 1), with L computed at
    the half budget the filter runs on."""
    heavy = heavy_set(q, params.alpha, params.c1)
    threshold = laplace_threshold(params.c2, params.epsilon / 2.0, heavy.size)
    q_heavy = q.probs[heavy]
    bounds = [
        (2.0 / (params.m * q_i))
        * (2.0 * threshold + poisson_deviation_bound(params.m, q_i, params.n) + 1.0)
        for q_i in q_heavy
    ]
    return max(bounds)


def noised_threshold(
    q: CategoricalDistribution,
    params: TestParams,
    rng: np.random.Generator,
    sims: int = 1000,
) -> float:
    """Calibrate the noised-statistic cutoff by simulating it under p = q.

    The cutoff is the empirical (1 - s) quantile of ``sims`` seeded draws of
    the released statistic, where s = (beta_I - c2/2)/(1 - c2) discounts the
    type I error the early return already spends, so the whole test lands at
    type I error beta_I.
    """
    heavy = heavy_set(q, params.alpha, params.c1)
    expected = params.m * q.probs[heavy]
    counts = rng.poisson(expected, size=(sims, heavy.size)).astype(np.float64)
    raw = _kernels.chisq_sum_rows(counts, expected)
    delta = noised_sensitivity_bound(q, params)
    release = raw + laplace_vector(2.0 * delta / params.epsilon, sims, rng)
    s = min(max((params.beta_I - params.c2 / 2.0) / (1.0 - params.c2), 0.0), 1.0)
    return float(np.quantile(release, 1.0 - s, method="higher"))


def privit_noised(
    q: CategoricalDistribution,
    p_source: PSource,
    params: TestParams,
    rng: np.random.Generator,
    threshold: float | None = None,
) -> Verdict:
    """Noised-statistic variant of the flagship tester.

    The early return and filter run exactly as in :func:`privit` but at half
    the privacy budget; the surviving unnormalized statistic is released with
    Laplace(2 Delta / eps) noise (Delta bounds its post-filter sensitivity,
    spending the other half) and compared against a calibrated cutoff.

    Pass a precomputed ``threshold`` (see :func:`noised_threshold`) when
    running many trials at one configuration; otherwise a fresh calibration
    runs on a child generator spawned from ``rng``.
    """
    if q.n != params.n:
        raise ConfigError(f"params.n={params.n} does not match q's support {q.n}")
    if threshold is None:
        threshold = noised_threshold(q, params, rng.spawn(1)[0])
    heavy = heavy_set(q, params.alpha, params.c1)
    eps_half = params.epsilon / 2.0
    scale = 2.0 / (params.c2 * eps_half)
    noise = laplace_vector(scale, heavy.size, rng)
    cutoff = laplace_threshold(params.c2, eps_half, heavy.size)
    if _kernels.max_abs(noise) >= cutoff:
        return _coin_verdict(rng, Branch.EARLY_RETURN)

    counts = _resolve_counts(q, p_source, params.m, rng)
    heavy_counts = counts[heavy].astype(np.float64)
    expected = params.m * q.probs[heavy]
    limits = deviation_limits(params.m, q.probs[heavy], params.n, cutoff)
    if _kernels.filter_breach(heavy_counts, noise, expected, limits):
        return Verdict(outcome=Outcome.NOT_EQUAL, branch=Branch.FILTER_REJECT)

    raw = _kernels.chisq_sum(heavy_counts, expected)
    delta = noised_sensitivity_bound(q, params)
    release = raw + laplace_sample(2.0 * delta / params.epsilon, rng)
    return Verdict(
        outcome=Outcome.NOT_EQUAL if release > threshold else Outcome.EQUAL,
        branch=Branch.BERNOULLI_STEP,
        statistic=release,
    )


def adk_chisq(
    q: CategoricalDistribution, hist: Histogram, params: TestParams
) -> Verdict:
    """Non-private chi-square-style tester: accept iff the heavy-set
    statistic stays below 1/2 (the midpoint of its two mean regimes)."""
    z = chisq_statistic(q, hist, params)
    return Verdict(
        outcome=Outcome.NOT_EQUAL if z >= 0.5 else Outcome.EQUAL,
        branch=Branch.BERNOULLI_STEP,
        statistic=z,
    )


def laplaced_chisq(
    q: CategoricalDistribution,
    hist: Histogram,
    params: TestParams,
    rng: np.random.Generator,
) -> Verdict:
    """Noisy-counts baseline: add Laplace(1/eps) to every count, compute the
    full-support statistic on the noised values, and threshold midway between
    its null mean (2/eps^2) sum_i 1/(m q_i) and the smallest alpha-far
    alternative mean 4 m alpha^2 above it.

    Requires q to have full support (every count is divided by m q_i).  The
    noise inflates the variance so brutally on low-mass symbols that this
    needs far more samples than the filtered testers; it is the in-package
    noisy-counts baseline.
    """
    if hist.n != q.n:
        raise DimensionMismatchError(f"histogram length {hist.n} != support {q.n}")
    noisy = hist.counts + laplace_vector(1.0 / params.epsilon, q.n, rng)
    expected = params.m * q.probs  # zprime_null_mean rejects zero-mass q_i
    cutoff = zprime_null_mean(q, params.m, params.epsilon) + 2.0 * params.m * params.alpha**2
    z = _kernels.chisq_sum(noisy, expected)
    return Verdict(
        outcome=Outcome.NOT_EQUAL if z >= cutoff else Outcome.EQUAL,
        branch=Branch.BERNOULLI_STEP,
        statistic=z,
    )


BaseTester = Callable[[TestParams, np.random.Generator], Verdict]


def amplified(
    base_tester: BaseTester,
    beta: float,
    params: TestParams,
    rng: np.random.Generator,
) -> Verdict:
    """Majority vote over ceil(18 ln(1/beta)) independent runs of a
    1/3-error base test, each drawing its own fresh samples; the majority is
    wrong with probability at most exp(-k/18) <= beta.  Ties reject.
    """
    k = amplification_factor(beta)
    verdicts = [base_tester(params, rng) for _ in range(k)]
    rejections = sum(v.outcome is Outcome.NOT_EQUAL for v in verdicts)
    outcome = Outcome.NOT_EQUAL if 2 * rejections >= k else Outcome.EQUAL
    witness = next(v for v in verdicts if v.outcome is outcome)
    return Verdict(outcome=outcome, branch=witness.branch, statistic=witness.statistic)


def repetition_wrapper(
    base_tester: BaseTester,
    epsilon: float,
    params: TestParams,
    rng: np.random.Generator,
) -> Verdict:
    """Folklore privatization of a non-private tester.

    With probability 1/5 answer a fair coin flip (flooring both outputs at
    probability 1/10); otherwise run the base tester on ceil(10/eps)
    independent datasets and return the verdict of one chosen uniformly.
    One record influences one sub-computation, which is selected with
    probability at most eps/10, giving (eps, 0)-differential privacy.
    """
    if epsilon <= 0:
        raise ConfigError("epsilon must be positive")
    if rng.random() < 0.2:
        return _coin_verdict(rng, Branch.EARLY_RETURN)
    k = math.ceil(10.0 / epsilon)
    verdicts = [base_tester(params, rng) for _ in range(k)]
    return verdicts[int(rng.integers(k))]


# ---------------------------------------------------------------------------
# Exact output-distribution algebra for the two wrappers.  These enumerate the
# coin/selection layers directly and serve as oracles for the Monte Carlo
# paths.
# ---------------------------------------------------------------------------


def repetition_success_probability(base_success: float, epsilon: float) -> float:
    """P(wrapper correct) by enumerating the coin and the uniform selection
    over the binomial count of correct sub-computations."""
    if not 0.0 <= base_success <= 1.0:
        raise ConfigError("base_success must lie in [0, 1]")
    k = math.ceil(10.0 / epsilon)
    p, q = base_success, 1.0 - base_success
    picked_correct = math.fsum(
        math.comb(k, j) * p**j * q ** (k - j) * (j / k) for j in range(k + 1)
    )
    return 0.2 * 0.5 + 0.8 * picked_correct


def repetition_outcome_shift(epsilon: float) -> float:
    """Largest additive change in P(wrapper outputs o) when exactly one
    sub-computation's outcome flips: the selection layer weights it 4/(5k)."""
    k = math.ceil(10.0 / epsilon)
    return 0.8 / k


def majority_failure_probability(k: int, base_success: float) -> float:
    """P(the k-test majority errs), ties counted as errors:
    P(Binomial(k, base_success) <= floor(k/2))."""
    if k < 1:
        raise ConfigError("k must be >= 1")
    p, q = base_success, 1.0 - base_success
    return math.fsum(
        math.comb(k, j) * p**j * q ** (k - j) for j in range(k // 2 + 1)
    )
