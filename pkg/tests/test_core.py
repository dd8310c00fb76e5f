import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import leaf_outcome_distribution, make_policy, make_profile, make_test
from screening_incentives import (
    CitizenChoice,
    ConfigError,
    InputError,
    ScreeningAction,
    ScreeningPolicy,
    TestKind,
    TestOutcome,
    assign_screening,
    expected_screening_cost,
    result_distribution,
)


def rule_table(risk, th1, th2):
    # independent restatement of the three-branch rule
    if risk > th1:
        return ScreeningAction.SDNA_CASCADE
    elif th2 < risk <= th1:
        return ScreeningAction.FIT_CASCADE
    else:
        return ScreeningAction.NONE


class TestAssignScreening:
    def test_far_above_th1(self):
        policy = make_policy(th1=0.01, th2=0.002)
        assert assign_screening(0.5, policy) is ScreeningAction.SDNA_CASCADE

    def test_boundary_at_th2_is_none(self):
        policy = make_policy(th1=0.01, th2=0.002)
        assert assign_screening(0.002, policy) is ScreeningAction.NONE

    def test_intermediate_is_fit(self):
        policy = make_policy(th1=0.01, th2=0.002)
        assert assign_screening(0.005, policy) is rule_table(0.005, 0.01, 0.002)
        assert assign_screening(0.005, policy) is ScreeningAction.FIT_CASCADE

    def test_boundary_at_th1_is_fit(self):
        policy = make_policy(th1=0.01, th2=0.002)
        assert assign_screening(0.01, policy) is ScreeningAction.FIT_CASCADE

    @given(
        risk=st.floats(0.0, 1.0),
        th1=st.floats(0.201, 0.99),
        th2=st.floats(0.01, 0.2),
    )
    @settings(derandomize=True, max_examples=200)
    def test_matches_rule_table(self, risk, th1, th2):
        policy = make_policy(th1=th1, th2=th2)
        assert assign_screening(risk, policy) is rule_table(risk, th1, th2)

    @given(
        r1=st.floats(0.0, 1.0),
        r2=st.floats(0.0, 1.0),
        th1=st.floats(0.201, 0.99),
        th2=st.floats(0.01, 0.2),
    )
    @settings(derandomize=True, max_examples=200)
    def test_monotone_in_risk(self, r1, r2, th1, th2):
        lo, hi = min(r1, r2), max(r1, r2)
        policy = make_policy(th1=th1, th2=th2)
        assert assign_screening(lo, policy).intensity <= assign_screening(hi, policy).intensity

    def test_invalid_risk(self):
        with pytest.raises(InputError):
            assign_screening(1.5, make_policy())

    def test_invalid_threshold_order(self):
        with pytest.raises(ConfigError, match="policy.th1/th2"):
            make_policy(th1=0.002, th2=0.01)
        with pytest.raises(ConfigError, match="policy.th1/th2"):
            make_policy(th1=0.01, th2=0.01)


class TestResultDistribution:
    def test_none_action_point_mass(self):
        dist = result_distribution(True, ScreeningAction.NONE, CitizenChoice.ACCEPT, make_policy())
        assert dist[TestOutcome.NO_RESULT] == 1.0
        assert dist[TestOutcome.POSITIVE] == 0.0

    def test_decline_point_mass_every_action_and_state(self):
        policy = make_policy()
        for crc in (True, False):
            for action in (ScreeningAction.FIT_CASCADE, ScreeningAction.SDNA_CASCADE,
                           ScreeningAction.NONE):
                dist = result_distribution(crc, action, CitizenChoice.DECLINE, policy)
                assert dist[TestOutcome.NO_RESULT] == 1.0

    def test_fit_cascade_sick(self):
        # 0.74 * 0.95 = 0.703 by direct product of stage sensitivities
        policy = make_policy(
            fit=make_test(TestKind.FIT, 0.74, 0.96),
            colonoscopy=make_test(TestKind.COLONOSCOPY, 0.95, 0.99),
        )
        dist = result_distribution(True, ScreeningAction.FIT_CASCADE, CitizenChoice.ACCEPT, policy)
        assert dist[TestOutcome.POSITIVE] == pytest.approx(0.703, abs=1e-12)
        assert dist[TestOutcome.NEGATIVE] == pytest.approx(0.297, abs=1e-12)
        ref = leaf_outcome_distribution(True, ScreeningAction.FIT_CASCADE, policy)
        assert dist[TestOutcome.POSITIVE] == pytest.approx(ref["positive"], abs=1e-15)

    def test_fit_cascade_healthy(self):
        policy = make_policy(
            fit=make_test(TestKind.FIT, 0.74, 0.96),
            colonoscopy=make_test(TestKind.COLONOSCOPY, 0.95, 0.99),
        )
        dist = result_distribution(False, ScreeningAction.FIT_CASCADE, CitizenChoice.ACCEPT, policy)
        assert dist[TestOutcome.POSITIVE] == pytest.approx(0.0004, abs=1e-12)
        assert dist[TestOutcome.NEGATIVE] == pytest.approx(0.9996, abs=1e-12)
        ref = leaf_outcome_distribution(False, ScreeningAction.FIT_CASCADE, policy)
        assert dist[TestOutcome.POSITIVE] == pytest.approx(ref["positive"], abs=1e-15)

    @given(
        crc=st.booleans(),
        sens_i=st.floats(0.0, 1.0),
        spec_i=st.floats(0.0, 1.0),
        sens_c=st.floats(0.0, 1.0),
        spec_c=st.floats(0.0, 1.0),
        sdna=st.booleans(),
    )
    @settings(derandomize=True, max_examples=300)
    def test_sums_to_one_exactly(self, crc, sens_i, spec_i, sens_c, spec_c, sdna):
        kind = TestKind.SDNA if sdna else TestKind.FIT
        action = ScreeningAction.SDNA_CASCADE if sdna else ScreeningAction.FIT_CASCADE
        policy = make_policy(
            fit=make_test(TestKind.FIT, sens_i, spec_i),
            sdna=make_test(TestKind.SDNA, sens_i, spec_i),
            colonoscopy=make_test(TestKind.COLONOSCOPY, sens_c, spec_c),
        )
        assert kind is action.initial_test_kind
        dist = result_distribution(crc, action, CitizenChoice.ACCEPT, policy)
        assert sum(dist.values()) == 1.0
        ref = leaf_outcome_distribution(crc, action, policy)
        assert dist[TestOutcome.POSITIVE] == pytest.approx(ref["positive"], abs=1e-12)
        assert dist[TestOutcome.NEGATIVE] == pytest.approx(ref["negative"], abs=1e-12)

    def test_missing_test_parameters(self):
        policy = ScreeningPolicy(th1=0.5, th2=0.1, tests={})
        with pytest.raises(ConfigError, match="missing test parameters"):
            result_distribution(True, ScreeningAction.FIT_CASCADE, CitizenChoice.ACCEPT, policy)


class TestExpectedScreeningCost:
    @given(
        crc=st.booleans(),
        sens_i=st.floats(0.01, 0.99),
        spec_i=st.floats(0.01, 0.99),
        sens_c=st.floats(0.01, 0.99),
        spec_c=st.floats(0.01, 0.99),
        cost_i=st.floats(0.0, 500.0),
        cost_c=st.floats(0.0, 2000.0),
    )
    @settings(derandomize=True, max_examples=200)
    def test_outcome_weighted_cost_matches_leaf_enumeration(
        self, crc, sens_i, spec_i, sens_c, spec_c, cost_i, cost_c
    ):
        policy = make_policy(
            fit=make_test(TestKind.FIT, sens_i, spec_i, cost=cost_i),
            colonoscopy=make_test(TestKind.COLONOSCOPY, sens_c, spec_c, cost=cost_c),
        )
        action = ScreeningAction.FIT_CASCADE
        dist = result_distribution(crc, action, CitizenChoice.ACCEPT, policy)
        folded = sum(
            p * expected_screening_cost(crc, action, outcome, policy)
            for outcome, p in dist.items()
        )
        from helpers import cascade_leaves

        direct = sum(
            p * (cost_i + (cost_c if col_ran else 0.0))
            for p, _, col_ran in cascade_leaves(crc, action, policy)
        )
        assert folded == pytest.approx(direct, abs=1e-9)

    def test_positive_outcome_always_charges_colonoscopy(self):
        policy = make_policy(
            fit=make_test(TestKind.FIT, 0.74, 0.96, cost=20.0),
            colonoscopy=make_test(TestKind.COLONOSCOPY, 0.95, 0.99, cost=600.0),
        )
        cost = expected_screening_cost(True, ScreeningAction.FIT_CASCADE,
                                       TestOutcome.POSITIVE, policy)
        assert cost == 620.0

    def test_no_result_costs_nothing(self):
        assert expected_screening_cost(True, ScreeningAction.FIT_CASCADE,
                                       TestOutcome.NO_RESULT, make_policy()) == 0.0
        assert expected_screening_cost(True, ScreeningAction.NONE,
                                       TestOutcome.NO_RESULT, make_policy()) == 0.0


class TestCovariateProfile:
    def test_valid(self):
        p = make_profile(age=42, eq5d_index=0.95)
        assert p.age == 42

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"age": 17},
            {"age": 101},
            {"ses_level": 0},
            {"ses_level": 6},
            {"eq5d_index": 0.0},
            {"eq5d_index": 1.2},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(InputError):
            make_profile(**kwargs)


class TestScreeningTest:
    def test_comfort_must_be_positive(self):
        with pytest.raises(ConfigError, match="comfort"):
            make_test(TestKind.FIT, 0.7, 0.9, comfort=0.0)

    def test_rates_in_unit_interval(self):
        with pytest.raises(ConfigError, match="sensitivity"):
            make_test(TestKind.FIT, 1.2, 0.9)
        with pytest.raises(ConfigError, match="specificity"):
            make_test(TestKind.FIT, 0.9, -0.1)
