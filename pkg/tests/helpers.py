"""Shared builders and independent reference computations for the tests.

The reference functions recompute expected utilities by enumerating the
two-stage cascade leaf by leaf (initial test, then colonoscopy on a
positive), deliberately not sharing code or structure with the package's
collapsed-outcome implementation.
"""

from __future__ import annotations

from typing import Dict, List, Tuple

from screening_incentives import (
    CitizenDraw,
    CitizenModelConfig,
    CovariateProfile,
    EconomicConstants,
    ScreeningAction,
    ScreeningPolicy,
    ScreeningTest,
    Sex,
    TestKind,
)


def make_test(kind: TestKind, sens: float, spec: float, cost: float = 0.0,
              comfort: float = 1.0) -> ScreeningTest:
    return ScreeningTest(kind=kind, sensitivity=sens, specificity=spec,
                         unit_cost=cost, comfort=comfort)


def make_policy(
    th1: float = 0.5,
    th2: float = 0.1,
    fit: ScreeningTest | None = None,
    sdna: ScreeningTest | None = None,
    colonoscopy: ScreeningTest | None = None,
) -> ScreeningPolicy:
    tests = {
        TestKind.FIT: fit or make_test(TestKind.FIT, 0.74, 0.96, 20.0, 3.0),
        TestKind.SDNA: sdna or make_test(TestKind.SDNA, 0.92, 0.87, 300.0, 2.0),
        TestKind.COLONOSCOPY: colonoscopy or make_test(TestKind.COLONOSCOPY, 0.95, 0.99, 600.0, 1.0),
    }
    return ScreeningPolicy(th1=th1, th2=th2, tests=tests)


def make_profile(age: int = 50, sex: Sex = Sex.MALE, smoker: bool = False,
                 alcohol: bool = False, diabetes: bool = False,
                 hypertension: bool = False, ses_level: int = 3,
                 eq5d_index: float = 1.0) -> CovariateProfile:
    return CovariateProfile(age=age, sex=sex, smoker=smoker, alcohol=alcohol,
                            diabetes=diabetes, hypertension=hypertension,
                            ses_level=ses_level, eq5d_index=eq5d_index)


def cascade_leaves(crc: bool, action: ScreeningAction, policy: ScreeningPolicy
                   ) -> List[Tuple[float, str, bool]]:
    """Leaves of the two-stage tree: (probability, final result,
    colonoscopy administered)."""
    initial = policy.tests[action.initial_test_kind]
    col = policy.tests[TestKind.COLONOSCOPY]
    p_init_pos = initial.sensitivity if crc else 1.0 - initial.specificity
    p_col_pos = col.sensitivity if crc else 1.0 - col.specificity
    return [
        (p_init_pos * p_col_pos, "positive", True),
        (p_init_pos * (1.0 - p_col_pos), "negative", True),
        (1.0 - p_init_pos, "negative", False),
    ]


def leaf_outcome_distribution(crc: bool, action: ScreeningAction,
                              policy: ScreeningPolicy) -> Dict[str, float]:
    dist = {"positive": 0.0, "negative": 0.0}
    for p, result, _ in cascade_leaves(crc, action, policy):
        dist[result] += p
    return dist


def reference_citizen_net(draw: CitizenDraw, action: ScreeningAction,
                          incentive: float, profile: CovariateProfile,
                          constants: EconomicConstants,
                          policy: ScreeningPolicy) -> float:
    """Accept-minus-decline expected utility by leaf enumeration."""
    initial = policy.tests[action.initial_test_kind]
    pt = draw.perceived_crc_prob_k
    total = 0.0
    for crc, weight in ((True, pt), (False, 1.0 - pt)):
        for p_leaf, result, _ in cascade_leaves(crc, action, policy):
            if crc and result == "positive":
                q = draw.qaly_detected_k
            elif crc and result == "negative":
                q = draw.qaly_missed_k
            else:
                q = 0.0
            burden = constants.burden_base * draw.burden_fraction_k / initial.comfort
            if result == "positive":
                burden -= constants.detection_relief
            u = constants.gdp_per_capita * profile.eq5d_index * q + incentive - burden
            total += weight * p_leaf * u
    return total


def reference_acceptance_threshold(draw: CitizenDraw, action: ScreeningAction,
                                   profile: CovariateProfile,
                                   constants: EconomicConstants,
                                   policy: ScreeningPolicy) -> float:
    """Smallest incentive at which this sampled citizen accepts."""
    net_at_zero = reference_citizen_net(draw, action, 0.0, profile, constants, policy)
    return max(0.0, -net_at_zero)


def reference_pm_accept_value(action: ScreeningAction, incentive: float,
                              risk: float, profile: CovariateProfile,
                              constants: EconomicConstants,
                              citizen: CitizenModelConfig,
                              policy: ScreeningPolicy) -> float:
    """Policymaker's accept-conditional expected utility by leaf
    enumeration, charging each leaf the tests it actually administered."""
    initial = policy.tests[action.initial_test_kind]
    col = policy.tests[TestKind.COLONOSCOPY]
    qd_mean = 0.5 * (citizen.qaly_detected.low + citizen.qaly_detected.high)
    qm_mean = 0.5 * (citizen.qaly_missed.low + citizen.qaly_missed.high)
    total = 0.0
    for crc, weight in ((True, risk), (False, 1.0 - risk)):
        for p_leaf, result, col_ran in cascade_leaves(crc, action, policy):
            if crc and result == "positive":
                q = qd_mean
            elif crc and result == "negative":
                q = qm_mean
            else:
                q = 0.0
            cost = initial.unit_cost + (col.unit_cost if col_ran else 0.0)
            treated = constants.treatment_cost if (crc and result == "positive") else 0.0
            u = (
                constants.gdp_per_capita * profile.eq5d_index * q
                - incentive
                + constants.pm_cost_sign * cost
                - treated
            )
            total += weight * p_leaf * u
    return total
