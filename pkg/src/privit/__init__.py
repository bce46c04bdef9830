"""Differentially private identity testing.

A library and CLI around a private chi-square-style identity tester, the
noisy-counts and repetition baselines, closed-form sample-size calculators,
privacy-guarantee conversions, and a Monte Carlo harness that measures
empirical sample complexity.
"""

from privit._kernels import active_backend, available_backends
from privit.distributions import (
    CategoricalDistribution,
    Histogram,
    chi_square_divergence,
    paninski_construction,
    perturb_on_heavy,
    sample_poissonized,
    tv_distance,
    two_histogram_construction,
    uniform,
)
from privit.errors import (
    ConfigError,
    ConstructionError,
    DimensionMismatchError,
    DivergenceUndefinedError,
    PrivitError,
    SearchExhaustedError,
)
from privit.harness import (
    CurvePoint,
    ExperimentConfig,
    estimate_errors,
    find_min_sample_size,
    run_experiment,
)
from privit.noise import (
    NoiseVector,
    laplace_mechanism,
    laplace_sample,
    laplace_threshold,
    poisson_deviation_bound,
)
from privit.privacy import (
    ApproxDP,
    PrivacyGuarantee,
    PureDP,
    ZCDP,
    parity_for_experiment,
    pure_to_zcdp,
    zcdp_to_approx,
)
from privit.testers import (
    Branch,
    Outcome,
    TestParams,
    Verdict,
    adk_chisq,
    amplified,
    chisq_statistic,
    heavy_set,
    laplaced_chisq,
    privit,
    privit_noised,
    repetition_wrapper,
)
from privit.theory import (
    SampleBound,
    chisq_sensitivity,
    noisy_counts_lower_bound,
    privit_sample_size,
    privit_strict_minimum,
    repetition_sample_size,
    zprime_mean,
    zprime_variance_exact,
)

__version__ = "0.1.0"
