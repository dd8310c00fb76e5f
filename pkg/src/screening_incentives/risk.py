"""Risk model surrogate and the age-marginal CRC probability table.

The policymaker's risk estimate comes from a logistic surrogate over the
named risk factors; the citizen's self-perception anchors on a coarse
age-band marginal probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Tuple

from .core import CovariateProfile, Sex
from .errors import ConfigError, InputError

# Covariate extraction used by the logistic surrogate. Boolean risk factors
# enter as 0/1 indicators, sex as a male indicator, and the socioeconomic
# stratum centered at its middle level.
COVARIATE_VALUES: Mapping[str, Callable[[CovariateProfile], float]] = {
    "smoker": lambda p: 1.0 if p.smoker else 0.0,
    "alcohol": lambda p: 1.0 if p.alcohol else 0.0,
    "diabetes": lambda p: 1.0 if p.diabetes else 0.0,
    "hypertension": lambda p: 1.0 if p.hypertension else 0.0,
    "male": lambda p: 1.0 if p.sex is Sex.MALE else 0.0,
    "ses_level": lambda p: float(p.ses_level - 3),
}


@dataclass(frozen=True)
class RiskSurrogate:
    """Logistic model on the log-odds scale.

    ``age_scale`` is the log-odds change per decade of age above 40; the
    named coefficients add their covariate value times the coefficient.
    """

    intercept: float
    coefficients: Mapping[str, float]
    age_scale: float = 0.0

    def __post_init__(self) -> None:
        unknown = sorted(set(self.coefficients) - set(COVARIATE_VALUES))
        if unknown:
            raise ConfigError(
                f"risk_model.coefficients: unknown covariate(s) {unknown}; "
                f"known: {sorted(COVARIATE_VALUES)}"
            )


def _logistic(z: float) -> float:
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def predict_risk(profile: CovariateProfile, model: RiskSurrogate) -> float:
    """Deterministic CRC probability for a profile under the surrogate."""
    z = model.intercept + model.age_scale * (profile.age - 40) / 10.0
    for name, coef in model.coefficients.items():
        z += coef * COVARIATE_VALUES[name](profile)
    return _logistic(z)


@dataclass(frozen=True)
class AgeBand:
    low: int
    high: int
    probability: float


@dataclass(frozen=True)
class AgeMarginalTable:
    """Marginal CRC probability by age band, partitioning ages 18..100."""

    bands: Tuple[AgeBand, ...]

    def __post_init__(self) -> None:
        if not self.bands:
            raise ConfigError("age_marginal_table: at least one band required")
        prev_high = 17
        prev_prob = 0.0
        for band in self.bands:
            where = f"age_marginal_table band [{band.low}, {band.high}]"
            if band.low != prev_high + 1:
                raise ConfigError(
                    f"{where}: bands must partition [18, 100] without gaps or overlaps"
                )
            if band.high < band.low:
                raise ConfigError(f"{where}: high < low")
            if not 0.0 < band.probability < 1.0:
                raise ConfigError(f"{where}: probability must be in (0, 1)")
            if band.probability < prev_prob:
                raise ConfigError(
                    f"{where}: probabilities must be non-decreasing with age"
                )
            prev_high = band.high
            prev_prob = band.probability
        if prev_high != 100:
            raise ConfigError("age_marginal_table: bands must end at age 100")

    def band_for(self, age: int) -> AgeBand:
        if not 18 <= age <= 100:
            raise InputError(f"age: {age} outside table coverage [18, 100]")
        for band in self.bands:
            if band.low <= age <= band.high:
                return band
        raise InputError(f"age: {age} not covered by any band")  # unreachable


def marginal_age_risk(age: int, table: AgeMarginalTable) -> float:
    """Marginal CRC probability of the band containing ``age``."""
    return table.band_for(age).probability
