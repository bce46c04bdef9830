"""Experiment driver: empirical error estimation, minimum-sample-size search,
and CSV emission of sample-complexity curves.

Reproducibility contract: every trial gets its own child generator derived
from the root seed and the indices (arm, n, m, trial), never from call order.
Two runs with the same configuration therefore produce byte-identical CSV,
and trials could be evaluated in any order or in parallel without changing
the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from privit.distributions import (
    CategoricalDistribution,
    gamma_for_heavy_tv,
    paninski_construction,
    perturb_on_heavy,
    sample_poissonized,
    two_histogram_construction,
    uniform,
)
from privit.errors import ConfigError, SearchExhaustedError
from privit.privacy import parity_for_experiment
from privit.testers import (
    Outcome,
    TestParams,
    Verdict,
    adk_chisq,
    laplaced_chisq,
    noised_threshold,
    privit,
    privit_noised,
    repetition_wrapper,
)

TESTER_IDS = ("privit", "privit_noised", "laplaced_chisq", "adk_chisq", "repetition")
CONSTRUCTIONS = ("uniform_vs_paninski", "two_histogram")

# Arm indices in the per-trial stream derivation; 2 is reserved for
# threshold calibration so no stream is reused across purposes.
NULL_ARM = 0
ALT_ARM = 1
CALIBRATION_ARM = 2

CSV_HEADER = "tester,n,m_min,type1,type2,alpha,epsilon,delta,seed"


@dataclass(frozen=True)
class ExperimentConfig:
    tester_id: str
    n_grid: tuple[int, ...]
    alpha: float = 0.1
    epsilon: float = 0.1
    delta: float | None = None
    trials: int = 1000
    error_target: float = 1.0 / 3.0
    root_seed: int = 0
    construction: str = "uniform_vs_paninski"
    m_cap: int = 100_000_000

    def __post_init__(self):
        if self.tester_id not in TESTER_IDS:
            raise ConfigError(f"tester must be one of {TESTER_IDS}, got {self.tester_id!r}")
        if self.construction not in CONSTRUCTIONS:
            raise ConfigError(
                f"construction must be one of {CONSTRUCTIONS}, got {self.construction!r}"
            )
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        for n in self.n_grid:
            if self.construction == "uniform_vs_paninski" and (n < 2 or n % 2):
                raise ConfigError("paninski construction needs even n >= 2")
            if self.construction == "two_histogram" and n < 20:
                raise ConfigError("two-histogram construction needs n >= 20")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not 0.0 < self.error_target < 0.5:
            raise ConfigError("error_target must lie strictly inside (0, 1/2)")
        if not 0.0 < self.alpha <= 1.0 or self.epsilon <= 0:
            raise ConfigError("alpha must lie in (0, 1] and epsilon be positive")
        if self.delta is not None and not 0.0 < self.delta < 1.0:
            raise ConfigError("delta must lie strictly inside (0, 1)")
        if self.root_seed < 0:
            raise ConfigError("root_seed must be a non-negative integer")
        if self.m_cap < 1:
            raise ConfigError("m_cap must be >= 1")

    @property
    def run_epsilon(self) -> float:
        """Privacy budget handed to the tester; the approx-DP parity value
        when a delta is configured."""
        if self.delta is None:
            return self.epsilon
        return parity_for_experiment(self.epsilon, [self.delta])[0].epsilon


@dataclass(frozen=True)
class CurvePoint:
    n: int
    m_min: int
    type1: float
    type2: float
    tester_id: str
    seed_used: int


def trial_rng(root_seed: int, arm: int, n: int, m: int, trial: int) -> np.random.Generator:
    """Child generator for one trial, keyed by indices only."""
    return np.random.default_rng([root_seed, arm, n, m, trial])


def make_pair(
    config: ExperimentConfig, n: int
) -> tuple[CategoricalDistribution, CategoricalDistribution]:
    """The (q, alpha-far p) pair the configured construction tests at size n."""
    if config.construction == "uniform_vs_paninski":
        q = uniform(n)
        # gamma = 2 alpha puts the alternative at tv distance exactly alpha.
        return q, paninski_construction(n, 2.0 * config.alpha)
    heavy_count = max(2, n // 200)
    q = two_histogram_construction(n, heavy_count, 1.0 - 10.0 / n)
    return q, perturb_on_heavy(q, gamma_for_heavy_tv(q, config.alpha))


class TrialRunner:
    """One tester bound to a configuration; called once per trial.

    ``prepare`` fixes everything that depends on (q, m) only, notably the
    per-trial TestParams and, for the noised variant, its calibrated cutoff.
    """

    def __init__(self, tester_id: str, alpha: float, epsilon: float):
        if tester_id not in TESTER_IDS:
            raise ConfigError(f"unknown tester {tester_id!r}")
        self.tester_id = tester_id
        self.alpha = alpha
        self.epsilon = epsilon
        self._params: TestParams | None = None
        self._threshold: float | None = None

    def prepare(self, q: CategoricalDistribution, m: int, root_seed: int):
        self._params = TestParams(
            n=q.n, alpha=self.alpha, epsilon=self.epsilon, m=float(m)
        )
        if self.tester_id == "privit_noised":
            rng = trial_rng(root_seed, CALIBRATION_ARM, q.n, m, 0)
            self._threshold = noised_threshold(q, self._params, rng)
        if self.tester_id == "repetition":
            k = math.ceil(10.0 / self.epsilon)
            # The swept m is the wrapper's total budget; each of the k
            # sub-datasets receives an equal share.
            self._params = replace(self._params, m=m / k)

    def __call__(
        self,
        q: CategoricalDistribution,
        p: CategoricalDistribution,
        rng: np.random.Generator,
    ) -> Verdict:
        params = self._params
        if params is None:
            raise ConfigError("runner used before prepare()")
        if self.tester_id == "privit":
            return privit(q, p, params, rng)
        if self.tester_id == "privit_noised":
            return privit_noised(q, p, params, rng, threshold=self._threshold)
        if self.tester_id == "adk_chisq":
            return adk_chisq(q, sample_poissonized(p, params.m, rng), params)
        if self.tester_id == "laplaced_chisq":
            return laplaced_chisq(q, sample_poissonized(p, params.m, rng), params, rng)
        # repetition: wrap the non-private tester, fresh samples per sub-test
        def base(sub_params: TestParams, sub_rng: np.random.Generator) -> Verdict:
            hist = sample_poissonized(p, sub_params.m, sub_rng)
            return adk_chisq(q, hist, sub_params)

        return repetition_wrapper(base, self.epsilon, params, rng)


def estimate_errors(
    runner: TrialRunner,
    null_pair: tuple[CategoricalDistribution, CategoricalDistribution],
    alt_pair: tuple[CategoricalDistribution, CategoricalDistribution],
    m: int,
    trials: int,
    root_seed: int,
) -> tuple[float, float]:
    """Empirical (type I, type II) error rates over seeded trials.

    Type I is the rejection rate under the null pair, type II the acceptance
    rate under the alternative pair.
    """
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    q, p_null = null_pair
    runner.prepare(q, m, root_seed)
    rejections = 0
    for t in range(trials):
        v = runner(q, p_null, trial_rng(root_seed, NULL_ARM, q.n, m, t))
        rejections += v.outcome is Outcome.NOT_EQUAL
    q_alt, p_alt = alt_pair
    acceptances = 0
    for t in range(trials):
        v = runner(q_alt, p_alt, trial_rng(root_seed, ALT_ARM, q_alt.n, m, t))
        acceptances += v.outcome is Outcome.EQUAL
    return rejections / trials, acceptances / trials


def find_min_sample_size(
    runner: TrialRunner, config: ExperimentConfig, n: int
) -> CurvePoint:
    """Smallest m with both empirical errors at or below the target.

    Geometric sweep m <- ceil(1.25 m) from m0 = sqrt(n)/alpha^2 until a pass,
    then bisection between the last failing and first passing m down to 5%
    relative width.  Raises SearchExhaustedError beyond the configured cap.
    """
    q, p_alt = make_pair(config, n)
    null_pair = (q, q)
    alt_pair = (q, p_alt)

    def errors_at(m: int) -> tuple[float, float]:
        return estimate_errors(
            runner, null_pair, alt_pair, m, config.trials, config.root_seed
        )

    def passes(errs: tuple[float, float]) -> bool:
        return errs[0] <= config.error_target and errs[1] <= config.error_target

    m = max(1, math.ceil(math.sqrt(n) / config.alpha**2))
    last_fail = None
    while True:
        if m > config.m_cap:
            raise SearchExhaustedError(
                f"no m <= {config.m_cap} reached error target {config.error_target}"
            )
        errs = errors_at(m)
        if passes(errs):
            break
        last_fail = m
        m = math.ceil(1.25 * m)

    if last_fail is not None:
        lo, hi, hi_errs = last_fail, m, errs
        while hi - lo > 0.05 * hi:
            mid = (lo + hi) // 2
            if mid in (lo, hi):
                break
            mid_errs = errors_at(mid)
            if passes(mid_errs):
                hi, hi_errs = mid, mid_errs
            else:
                lo = mid
        m, errs = hi, hi_errs

    return CurvePoint(
        n=n,
        m_min=m,
        type1=errs[0],
        type2=errs[1],
        tester_id=runner.tester_id,
        seed_used=config.root_seed,
    )


def run_experiment(config: ExperimentConfig) -> list[CurvePoint]:
    """One CurvePoint per grid n; the tester runs at the parity budget when a
    delta is configured."""
    runner = TrialRunner(config.tester_id, config.alpha, config.run_epsilon)
    return [find_min_sample_size(runner, config, n) for n in config.n_grid]


def points_to_csv(points: list[CurvePoint], config: ExperimentConfig) -> str:
    rows = [CSV_HEADER]
    delta = "" if config.delta is None else str(config.delta)
    for pt in points:
        rows.append(
            f"{pt.tester_id},{pt.n},{pt.m_min},{pt.type1},{pt.type2},"
            f"{config.alpha},{config.epsilon},{delta},{pt.seed_used}"
        )
    return "\n".join(rows) + "\n"


# ---------------------------------------------------------------------------
# Flat key=value config files.
# ---------------------------------------------------------------------------

_CONFIG_KEYS = {
    "tester",
    "n_grid",
    "alpha",
    "epsilon",
    "delta",
    "trials",
    "error_target",
    "root_seed",
    "construction",
    "m_cap",
}


def parse_config(text: str) -> ExperimentConfig:
    """Parse a flat ``key = value`` document (# comments, blank lines ok)."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        raw[key] = value
    if "tester" not in raw or "n_grid" not in raw:
        raise ConfigError("config must set at least 'tester' and 'n_grid'")

    def num(key: str, cast, default):
        if key not in raw or raw[key] == "":
            return default
        try:
            return cast(raw[key])
        except ValueError as exc:
            raise ConfigError(f"config key {key!r}: {exc}") from exc

    try:
        n_grid = tuple(int(tok) for tok in raw["n_grid"].replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(f"config key 'n_grid': {exc}") from exc
    return ExperimentConfig(
        tester_id=raw["tester"],
        n_grid=n_grid,
        alpha=num("alpha", float, 0.1),
        epsilon=num("epsilon", float, 0.1),
        delta=num("delta", float, None),
        trials=num("trials", int, 1000),
        error_target=num("error_target", float, 1.0 / 3.0),
        root_seed=num("root_seed", int, 0),
        construction=raw.get("construction", "uniform_vs_paninski"),
        m_cap=num("m_cap", int, 100_000_000),
    )


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
