"""Monetary utilities of policymaker and citizen, and the random citizen
model they are evaluated against.

Life-year gains are monetized at GDP per capita and scaled by the profile's
health utility index. The citizen additionally bears a screening burden,
``burden_base * fraction / comfort`` less a fixed relief on a positive
result, and receives the incentive when accepting. The policymaker pays the
incentive, the expected test costs, and the treatment cost on a confirmed
detection.

Utilities of the declined branch are exactly zero by convention (no
incentive, no burden, no tests, no health change), so every expected
utility downstream reads as a gain over the status quo.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .core import (
    CitizenChoice,
    CovariateProfile,
    ScreeningAction,
    ScreeningPolicy,
    TestOutcome,
    expected_screening_cost,
)
from .errors import ConfigError, InputError
from .risk import AgeMarginalTable


@dataclass(frozen=True)
class UniformInterval:
    """Closed interval sampled uniformly; low == high is a point mass."""

    low: float
    high: float

    def __post_init__(self) -> None:
        if not self.low <= self.high:
            raise ConfigError(f"interval: low {self.low} > high {self.high}")

    @property
    def mean(self) -> float:
        return 0.5 * (self.low + self.high)

    def sample(self, rng: np.random.Generator) -> float:
        return float(rng.uniform(self.low, self.high))


@dataclass(frozen=True)
class EconomicConstants:
    """Monetary constants of the incentive problem, in euros.

    ``pm_cost_sign`` controls how screening expenditure enters the
    policymaker's utility: -1 treats it as an expense (default), +1 flips
    the sign for sensitivity analysis.
    """

    gdp_per_capita: float = 30_968.0
    treatment_cost: float = 25_955.0
    burden_base: float = 200.0
    detection_relief: float = 1_000.0
    pm_cost_sign: int = -1

    def __post_init__(self) -> None:
        for name in ("gdp_per_capita", "treatment_cost", "burden_base", "detection_relief"):
            if not getattr(self, name) > 0.0:
                raise ConfigError(f"economic.{name}: must be > 0")
        if self.pm_cost_sign not in (-1, 1):
            raise ConfigError("economic.pm_cost_sign: must be -1 or +1")


@dataclass(frozen=True)
class CitizenModelConfig:
    """Random model of the citizen's utilities and beliefs.

    Quality-adjusted life-year effects and the burden fraction are uniform;
    the self-perceived CRC probability is Beta-distributed with mean equal
    to the age-marginal probability shrunk by the misconception factor and
    standard deviation ``perceived_sd_factor`` times the age-marginal
    probability.
    """

    qaly_missed: UniformInterval = UniformInterval(-5.0, -3.0)
    qaly_detected: UniformInterval = UniformInterval(5.0, 10.0)
    burden_fraction: UniformInterval = UniformInterval(0.6, 0.9)
    misconception: UniformInterval = UniformInterval(0.3, 0.4)
    perceived_sd_factor: float = 0.1

    def __post_init__(self) -> None:
        if not self.misconception.low > 0.0 or not self.misconception.high <= 1.0:
            raise ConfigError(
                "citizen.misconception: interval must lie within (0, 1]"
            )
        if not self.perceived_sd_factor > 0.0:
            raise ConfigError("citizen.perceived_sd_factor: must be > 0")


@dataclass(frozen=True)
class CitizenDraw:
    """One sampled realization of the citizen's random utility and belief."""

    qaly_missed_k: float
    qaly_detected_k: float
    burden_fraction_k: float
    perceived_crc_prob_k: float


def qaly_gain(crc: bool, outcome: TestOutcome, draw: CitizenDraw) -> float:
    """Life-year effect of the screening episode: a loss when disease is
    missed, a gain when it is detected, zero in every other case."""
    if crc and outcome is TestOutcome.NEGATIVE:
        return draw.qaly_missed_k
    if crc and outcome is TestOutcome.POSITIVE:
        return draw.qaly_detected_k
    return 0.0


def pm_utility(
    profile: CovariateProfile,
    crc: bool,
    action: ScreeningAction,
    choice: CitizenChoice,
    outcome: TestOutcome,
    incentive: float,
    qaly: float,
    constants: EconomicConstants,
    policy: ScreeningPolicy,
) -> float:
    """Policymaker's monetary utility for one realized episode.

    Health value of the (monetized, index-scaled) life-year change, minus
    the incentive paid on acceptance, the expected test costs of the
    administered cascade, and the treatment cost when disease is confirmed.
    """
    if incentive < 0.0:
        raise InputError(f"incentive: {incentive} must be >= 0")
    health = constants.gdp_per_capita * profile.eq5d_index * qaly
    if choice is not CitizenChoice.ACCEPT or action is ScreeningAction.NONE:
        return health
    cost = expected_screening_cost(crc, action, outcome, policy)
    treated = constants.treatment_cost if (crc and outcome is TestOutcome.POSITIVE) else 0.0
    return health - incentive + constants.pm_cost_sign * cost - treated


def citizen_utility(
    profile: CovariateProfile,
    crc: bool,
    action: ScreeningAction,
    choice: CitizenChoice,
    outcome: TestOutcome,
    incentive: float,
    draw: CitizenDraw,
    constants: EconomicConstants,
    policy: ScreeningPolicy,
) -> float:
    """Citizen's monetary utility for one realized episode.

    Health value plus the incentive received, minus the screening burden;
    a positive result offsets the burden by the detection relief.
    """
    if incentive < 0.0:
        raise InputError(f"incentive: {incentive} must be >= 0")
    health = constants.gdp_per_capita * profile.eq5d_index * qaly_gain(crc, outcome, draw)
    if choice is not CitizenChoice.ACCEPT or action is ScreeningAction.NONE:
        return health
    comfort = policy.initial_test(action).comfort
    burden = constants.burden_base * draw.burden_fraction_k / comfort
    if outcome is TestOutcome.POSITIVE:
        burden -= constants.detection_relief
    return health + incentive - burden


def beta_params(mean: float, variance: float) -> Tuple[float, float]:
    """Shape parameters of the Beta distribution with the given moments.

    Uses the moment match nu = mean*(1-mean)/variance - 1, alpha = mean*nu,
    beta = (1-mean)*nu. Requires 0 < mean < 1 and 0 < variance <
    mean*(1-mean).
    """
    if not 0.0 < mean < 1.0:
        raise ConfigError(f"beta mean {mean} must be in (0, 1)")
    bound = mean * (1.0 - mean)
    if not 0.0 < variance < bound:
        raise ConfigError(
            f"beta variance {variance} infeasible for mean {mean}: "
            f"must be in (0, {bound})"
        )
    nu = bound / variance - 1.0
    return mean * nu, (1.0 - mean) * nu


def perceived_probability_params(
    p_marginal: float, misconception_value: float, sd_factor: float
) -> Tuple[float, float]:
    """Beta parameters of the self-perceived CRC probability given the
    age-marginal anchor and a realized misconception factor."""
    mean = p_marginal * misconception_value
    variance = (p_marginal * sd_factor) ** 2
    return beta_params(mean, variance)


def sample_citizen_draw(
    profile: CovariateProfile,
    config: CitizenModelConfig,
    table: AgeMarginalTable,
    rng: np.random.Generator,
) -> CitizenDraw:
    """Draw one realization of the citizen's random utility and belief.

    Consumes the stream in a fixed order (missed QALY, detected QALY,
    burden fraction, misconception, perceived probability), so results are
    reproducible from the generator state alone.
    """
    qaly_missed = config.qaly_missed.sample(rng)
    qaly_detected = config.qaly_detected.sample(rng)
    burden_fraction = config.burden_fraction.sample(rng)
    misconception = config.misconception.sample(rng)
    band = table.band_for(profile.age)
    try:
        alpha, beta = perceived_probability_params(
            band.probability, misconception, config.perceived_sd_factor
        )
    except ConfigError as exc:
        raise ConfigError(
            f"age_marginal_table band [{band.low}, {band.high}]: {exc}"
        ) from None
    perceived = float(rng.beta(alpha, beta))
    return CitizenDraw(qaly_missed, qaly_detected, burden_fraction, perceived)


def sample_citizen_draws(
    profile: CovariateProfile,
    config: CitizenModelConfig,
    table: AgeMarginalTable,
    rng: np.random.Generator,
    k: int,
) -> list[CitizenDraw]:
    if k < 1:
        raise InputError(f"k: {k} must be >= 1")
    return [sample_citizen_draw(profile, config, table, rng) for _ in range(k)]
