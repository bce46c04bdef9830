"""Privacy-guarantee algebra: pure DP <-> zCDP <-> approximate DP.

Only the two conversion directions needed for experiment parity are
implemented; natural logarithms throughout (Renyi-divergence convention).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from privit.errors import ConfigError


@dataclass(frozen=True)
class PureDP:
    epsilon: float

    def __post_init__(self):
        _check_param("epsilon", self.epsilon)


@dataclass(frozen=True)
class ApproxDP:
    epsilon: float
    delta: float

    def __post_init__(self):
        _check_param("epsilon", self.epsilon)
        if not (0.0 <= self.delta < 1.0 and math.isfinite(self.delta)):
            raise ConfigError("delta must lie in [0, 1)")


@dataclass(frozen=True)
class ZCDP:
    rho: float

    def __post_init__(self):
        _check_param("rho", self.rho)


PrivacyGuarantee = PureDP | ApproxDP | ZCDP


def _check_param(name: str, value: float):
    if not (value >= 0.0 and math.isfinite(value)):
        raise ConfigError(f"{name} must be a finite non-negative real")


def pure_to_zcdp(epsilon: float) -> float:
    """(epsilon, 0)-DP implies (epsilon^2 / 2)-zCDP."""
    _check_param("epsilon", epsilon)
    return epsilon * epsilon / 2.0


def zcdp_to_approx(rho: float, delta: float) -> float:
    """rho-zCDP implies (rho + 2 sqrt(rho ln(1/delta)), delta)-DP."""
    _check_param("rho", rho)
    if not 0.0 < delta < 1.0:
        raise ConfigError("delta must lie strictly inside (0, 1)")
    return rho + 2.0 * math.sqrt(rho * math.log(1.0 / delta))


def parity_for_experiment(epsilon: float, delta_grid) -> list[ApproxDP]:
    """Approximate-DP guarantees implied by (epsilon^2 / 2)-zCDP, one per delta.

    Used to run the pure-DP tester at budget
    eps' = epsilon^2 / 2 + epsilon * sqrt(2 ln(1/delta)) so its guarantee
    matches a zCDP competitor's.
    """
    if epsilon <= 0:
        raise ConfigError("epsilon must be positive")
    out = []
    for delta in delta_grid:
        if not 0.0 < delta < 1.0:
            raise ConfigError("every delta must lie strictly inside (0, 1)")
        eps_prime = epsilon * epsilon / 2.0 + epsilon * math.sqrt(
            2.0 * math.log(1.0 / delta)
        )
        out.append(ApproxDP(epsilon=eps_prime, delta=delta))
    return out
