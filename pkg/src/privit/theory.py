"""Closed-form calculators: sample-size bounds, noised-statistic moments,
and the chi-square sensitivity identity.

Everything here is a deterministic pure function; the Monte Carlo side of the
package validates these formulas empirically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from privit.distributions import CategoricalDistribution, chi_square_divergence
from privit.errors import ConfigError

#: Filtering/statistic constants of the flagship tester.
C1_DEFAULT = 1.0 / 4.0
C2_DEFAULT = 3.0 / 40.0

#: Constant in the non-private m = C0 sqrt(n) / alpha^2 requirement.  The
#: asymptotic theory hides it; 5 is the smallest round value that passed the
#: 1/3-error criterion at n in {100, 1000} in pilot harness runs.
DEFAULT_C0 = 5.0

#: Majority-amplification constant: ceil(18 ln(1/beta)) sub-tests drive the
#: failure probability below beta (Hoeffding: exp(-2k (2/3 - 1/2)^2)).
AMPLIFICATION_CONSTANT = 18.0


def amplification_factor(beta: float) -> int:
    """Number of independent 1/3-error sub-tests whose majority errs <= beta.

    Callers content with beta >= 1/3 get the single unamplified test.
    """
    if not 0.0 < beta < 1.0:
        raise ConfigError("beta must lie strictly inside (0, 1)")
    if beta >= 1.0 / 3.0:
        return 1
    return max(1, math.ceil(AMPLIFICATION_CONSTANT * math.log(1.0 / beta)))


@dataclass(frozen=True)
class SampleBound:
    """A sample-size requirement: max of competing terms times amplification."""

    total: float
    binding_term: str
    amplification_factor: int
    terms: dict[str, float]


def _check_ranges(n: int, alpha: float, epsilon: float):
    if n < 2:
        raise ConfigError("n must be >= 2")
    if not 0.0 < alpha <= 1.0:
        raise ConfigError("alpha must lie in (0, 1]")
    if epsilon <= 0:
        raise ConfigError("epsilon must be positive")


def privit_terms(
    n: int,
    alpha: float,
    epsilon: float,
    c1: float = C1_DEFAULT,
    c2: float = C2_DEFAULT,
    c0: float = DEFAULT_C0,
) -> dict[str, float]:
    """The three competing m requirements of the flagship tester.

    * ``statistic``: C0 sqrt(n)/alpha^2, needed for the chi-square statistic
      to separate the hypotheses;
    * ``laplace_tail``: sqrt(192/(c2^2 c1)) sqrt(n ln(n/c2)) / (alpha^1.5 eps),
      keeps the noise-threshold part of the post-filter sensitivity small;
    * ``poisson_tail``: (128/(c2 sqrt(c1)))^(2/3) (n ln n)^(1/3)
      / (alpha^(5/3) eps^(2/3)), same for the count-deviation part.

    The two tail constants carry a factor-2 uplift over the bare derivation
    so they remain valid for the statistic's 2/(m alpha^2) prefactor.
    """
    _check_ranges(n, alpha, epsilon)
    statistic = c0 * math.sqrt(n) / alpha**2
    laplace_tail = (
        math.sqrt(192.0 / (c2 * c2 * c1))
        * math.sqrt(n * math.log(n / c2))
        / (alpha**1.5 * epsilon)
    )
    poisson_tail = (
        (128.0 / (c2 * math.sqrt(c1))) ** (2.0 / 3.0)
        * (n * math.log(n)) ** (1.0 / 3.0)
        / (alpha ** (5.0 / 3.0) * epsilon ** (2.0 / 3.0))
    )
    return {
        "statistic": statistic,
        "laplace_tail": laplace_tail,
        "poisson_tail": poisson_tail,
    }


def privit_sample_size(
    n: int,
    alpha: float,
    epsilon: float,
    beta: float = 1.0 / 3.0,
    c1: float = C1_DEFAULT,
    c2: float = C2_DEFAULT,
    c0: float = DEFAULT_C0,
) -> SampleBound:
    """Expected sample count sufficient for the flagship tester at error beta.

    Max of the three competing terms, times the majority-amplification factor
    (each sub-test receives its own budget).
    """
    terms = privit_terms(n, alpha, epsilon, c1=c1, c2=c2, c0=c0)
    binding = max(terms, key=terms.get)
    amp = amplification_factor(beta)
    return SampleBound(
        total=terms[binding] * amp,
        binding_term=binding,
        amplification_factor=amp,
        terms=terms,
    )


def privit_strict_minimum(
    n: int,
    alpha: float,
    epsilon: float,
    c1: float = C1_DEFAULT,
    c2: float = C2_DEFAULT,
) -> float:
    """The m floor below which the tester's privacy argument breaks.

    Running with smaller m voids the post-filter Lipschitz bound, hence the
    privacy guarantee; strict-mode configurations refuse it.
    """
    terms = privit_terms(n, alpha, epsilon, c1=c1, c2=c2, c0=0.0)
    return max(terms["laplace_tail"], terms["poisson_tail"])


def repetition_sample_size(
    n: int,
    alpha: float,
    epsilon: float,
    beta: float = 1.0 / 3.0,
    c0: float = DEFAULT_C0,
) -> float:
    """Total samples for the repetition wrapper: ceil(10/eps) datasets of the
    non-private size C0 sqrt(n)/alpha^2 each, times amplification."""
    _check_ranges(n, alpha, epsilon)
    base = c0 * math.sqrt(n) / alpha**2
    return math.ceil(10.0 / epsilon) * base * amplification_factor(beta)


def zprime_null_mean(q: CategoricalDistribution, m: float, epsilon: float) -> float:
    """Mean of the noised-counts statistic when p = q: (2/eps^2) sum_i 1/(m q_i).

    Equals 2 n^2 / (eps^2 m) for uniform q.
    """
    if m <= 0 or epsilon <= 0:
        raise ConfigError("m and epsilon must be positive")
    if np.any(q.probs == 0):
        raise ConfigError("q must have full support")
    return (2.0 / epsilon**2) * float(np.sum(1.0 / (m * q.probs)))


def zprime_mean(
    p: CategoricalDistribution,
    q: CategoricalDistribution,
    m: float,
    epsilon: float,
) -> float:
    """Mean of the noised-counts statistic: m chi^2(p, q) + (2/eps^2) sum 1/(m q_i)."""
    return m * chi_square_divergence(p, q) + zprime_null_mean(q, m, epsilon)


def zprime_variance_exact(
    p: CategoricalDistribution, m: float, epsilon: float, n: int
) -> float:
    """Exact variance of the noised-counts statistic against uniform(n).

    Per symbol, with lam = m p_i and lam' = m/n:
      (1/lam'^2) [ 2 lam^2 + 4 lam (lam - lam')^2
                   + (1/eps^2)(8 lam + 2 (2 lam - 2 lam' - 1)^2) + 20/eps^4 ].
    """
    if p.n != n:
        raise ConfigError("p must live on a support of size n")
    if m <= 0 or epsilon <= 0:
        raise ConfigError("m and epsilon must be positive")
    lam = m * p.probs
    lam_ref = m / n
    inv_e2 = 1.0 / epsilon**2
    per_symbol = (
        2.0 * lam**2
        + 4.0 * lam * (lam - lam_ref) ** 2
        + inv_e2 * (8.0 * lam + 2.0 * (2.0 * lam - 2.0 * lam_ref - 1.0) ** 2)
        + 20.0 * inv_e2 * inv_e2
    )
    return float(np.sum(per_symbol)) / lam_ref**2


def zprime_variance_lower_bound(n: int, m: float, epsilon: float) -> float:
    """The noise-only floor 20 n^3 / (eps^4 m^2) of the statistic's variance."""
    return 20.0 * n**3 / (epsilon**4 * m**2)


def chisq_sensitivity(
    n_i: float, m: float, q_i: float, alpha: float, prefactor: float = 2.0
) -> float:
    """|Z(D) - Z(D')| for one fewer occurrence of a symbol with count N_i:
    (prefactor/(m alpha^2)) * 2 |N_i - m q_i - 1| / (m q_i).

    ``prefactor`` selects the statistic normalization (2 = the tester's
    2/(m alpha^2); 1 = the bare 1/(m alpha^2) form).
    """
    if m <= 0 or q_i <= 0 or alpha <= 0:
        raise ConfigError("m, q_i and alpha must be positive")
    return (prefactor / (m * alpha**2)) * 2.0 * abs(n_i - m * q_i - 1.0) / (m * q_i)


def noisy_counts_lower_bound(n: int, alpha: float, epsilon: float) -> float:
    """Crossover m where the noised statistic's variance floor equals the
    squared mean separation: solves 20 n^3/(eps^4 m^2) = m^2 alpha^4, i.e.
    m = 20^(1/4) n^(3/4) / (eps alpha)."""
    _check_ranges(n, alpha, epsilon)
    return 20.0 ** 0.25 * n ** 0.75 / (epsilon * alpha)
