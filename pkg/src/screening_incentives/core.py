"""Core domain objects: citizen covariates, screening tests, test outcomes,
and the risk-threshold screening policy.

All types are immutable value objects; they can be shared freely between
threads once constructed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Mapping

from .errors import ConfigError, InputError


class Sex(str, Enum):
    MALE = "male"
    FEMALE = "female"


class TestKind(str, Enum):
    NONE = "none"
    FIT = "fit"
    SDNA = "sdna"
    COLONOSCOPY = "colonoscopy"


class ScreeningAction(str, Enum):
    """Screening protocol proposed to a citizen.

    A cascade administers its initial test and follows a positive result
    with a confirmatory colonoscopy.
    """

    NONE = "none"
    FIT_CASCADE = "fit_cascade"
    SDNA_CASCADE = "sdna_cascade"

    @property
    def intensity(self) -> int:
        """Escalation rank: none < fit_cascade < sdna_cascade."""
        return _ACTION_INTENSITY[self]

    @property
    def initial_test_kind(self) -> TestKind:
        if self is ScreeningAction.NONE:
            raise InputError("action 'none' has no initial test")
        return _INITIAL_TEST[self]


class CitizenChoice(str, Enum):
    ACCEPT = "accept"
    DECLINE = "decline"


class TestOutcome(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    NO_RESULT = "no_result"


_ACTION_INTENSITY = {
    ScreeningAction.NONE: 0,
    ScreeningAction.FIT_CASCADE: 1,
    ScreeningAction.SDNA_CASCADE: 2,
}

_INITIAL_TEST = {
    ScreeningAction.FIT_CASCADE: TestKind.FIT,
    ScreeningAction.SDNA_CASCADE: TestKind.SDNA,
}


@dataclass(frozen=True)
class CovariateProfile:
    """One citizen's features: demographics, lifestyle, comorbidity, and
    the health utility index that scales the monetary value of a life year."""

    age: int
    sex: Sex
    smoker: bool
    alcohol: bool
    diabetes: bool
    hypertension: bool
    ses_level: int
    eq5d_index: float

    def __post_init__(self) -> None:
        if not 18 <= self.age <= 100:
            raise InputError(f"profile.age: {self.age} outside [18, 100]")
        if not 1 <= self.ses_level <= 5:
            raise InputError(f"profile.ses_level: {self.ses_level} outside [1, 5]")
        if not 0.0 < self.eq5d_index <= 1.0:
            raise InputError(
                f"profile.eq5d_index: {self.eq5d_index} outside (0, 1]"
            )


@dataclass(frozen=True)
class ScreeningTest:
    """Operating characteristics and per-use economics of one test."""

    kind: TestKind
    sensitivity: float
    specificity: float
    unit_cost: float
    comfort: float

    def __post_init__(self) -> None:
        prefix = f"tests.{self.kind.value}"
        if not 0.0 <= self.sensitivity <= 1.0:
            raise ConfigError(f"{prefix}.sensitivity: must be in [0, 1]")
        if not 0.0 <= self.specificity <= 1.0:
            raise ConfigError(f"{prefix}.specificity: must be in [0, 1]")
        if self.unit_cost < 0.0:
            raise ConfigError(f"{prefix}.unit_cost: must be >= 0")
        # comfort divides the screening burden, so zero is not representable
        if not self.comfort > 0.0:
            raise ConfigError(f"{prefix}.comfort: must be > 0")


@dataclass(frozen=True)
class ScreeningPolicy:
    """Two-threshold rule mapping model risk to a screening cascade,
    together with the test parameters the cascades use."""

    th1: float
    th2: float
    tests: Mapping[TestKind, ScreeningTest] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 0.0 < self.th2 < self.th1 < 1.0:
            raise ConfigError(
                f"policy.th1/th2: need 0 < th2 < th1 < 1, got th1={self.th1}, th2={self.th2}"
            )

    def initial_test(self, action: ScreeningAction) -> ScreeningTest:
        kind = action.initial_test_kind
        try:
            return self.tests[kind]
        except KeyError:
            raise ConfigError(f"tests.{kind.value}: missing test parameters") from None

    def colonoscopy(self) -> ScreeningTest:
        try:
            return self.tests[TestKind.COLONOSCOPY]
        except KeyError:
            raise ConfigError("tests.colonoscopy: missing test parameters") from None


def assign_screening(risk: float, policy: ScreeningPolicy) -> ScreeningAction:
    """Map a CRC risk estimate to the proposed screening action.

    Strictly above th1 triggers the sDNA cascade, strictly above th2 the
    FIT cascade, anything else no screening.
    """
    if not 0.0 <= risk <= 1.0:
        raise InputError(f"risk: {risk} outside [0, 1]")
    if risk > policy.th1:
        return ScreeningAction.SDNA_CASCADE
    if risk > policy.th2:
        return ScreeningAction.FIT_CASCADE
    return ScreeningAction.NONE


def result_distribution(
    crc: bool,
    action: ScreeningAction,
    choice: CitizenChoice,
    policy: ScreeningPolicy,
) -> Dict[TestOutcome, float]:
    """Distribution of the final cascade outcome given disease state.

    A declined or absent screening yields no_result with probability one.
    Otherwise the cascade reports positive only when the initial test and
    the follow-up colonoscopy both err or both hit, with independent
    per-stage errors; every other path collapses to negative.
    """
    if choice is CitizenChoice.DECLINE or action is ScreeningAction.NONE:
        return {
            TestOutcome.POSITIVE: 0.0,
            TestOutcome.NEGATIVE: 0.0,
            TestOutcome.NO_RESULT: 1.0,
        }
    initial = policy.initial_test(action)
    col = policy.colonoscopy()
    if crc:
        p_pos = initial.sensitivity * col.sensitivity
    else:
        p_pos = (1.0 - initial.specificity) * (1.0 - col.specificity)
    return {
        TestOutcome.POSITIVE: p_pos,
        TestOutcome.NEGATIVE: 1.0 - p_pos,
        TestOutcome.NO_RESULT: 0.0,
    }


def expected_screening_cost(
    crc: bool,
    action: ScreeningAction,
    outcome: TestOutcome,
    policy: ScreeningPolicy,
) -> float:
    """Expected test spending conditional on the final cascade outcome.

    The initial test is always paid for; the colonoscopy is paid exactly on
    paths where the initial test came back positive. Conditioning on the
    collapsed outcome therefore charges the colonoscopy with the conditional
    probability that the initial stage was positive, which makes the
    outcome-weighted expectation match a full enumeration of the two-stage
    tree.
    """
    if action is ScreeningAction.NONE or outcome is TestOutcome.NO_RESULT:
        return 0.0
    initial = policy.initial_test(action)
    col = policy.colonoscopy()
    if outcome is TestOutcome.POSITIVE:
        # a positive cascade implies the colonoscopy ran
        return initial.unit_cost + col.unit_cost
    p_init_pos = initial.sensitivity if crc else 1.0 - initial.specificity
    p_col_pos = col.sensitivity if crc else 1.0 - col.specificity
    p_final_neg = 1.0 - p_init_pos * p_col_pos
    joint_pos_then_neg = p_init_pos * (1.0 - p_col_pos)
    frac = joint_pos_then_neg / p_final_neg if p_final_neg > 0.0 else 0.0
    return initial.unit_cost + frac * col.unit_cost
