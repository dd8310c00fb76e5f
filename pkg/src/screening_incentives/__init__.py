"""Optimal financial incentives for colorectal cancer screening
participation.

The policymaker proposes a risk-matched screening cascade and offers a
financial incentive; the citizen, whose beliefs and preferences she only
knows up to a random model, accepts or declines. The package estimates the
acceptance probability by simulation, maximizes the policymaker's expected
utility over an incentive grid, and scales the analysis from one patient to
a synthetic cohort under budget constraints.
"""

from .ara import (
    AraResult,
    IncentiveGrid,
    ReplicationSummary,
    citizen_accepts,
    citizen_expected_utility,
    estimate_acceptance,
    optimal_incentive,
    pm_expected_utility,
    replicate_optimal_incentive,
)
from .config import (
    EngineSettings,
    RunConfig,
    config_hash,
    default_config,
    from_dict,
    load_config,
    parse_profile,
    to_dict,
    with_overrides,
)
from .core import (
    CitizenChoice,
    CovariateProfile,
    ScreeningAction,
    ScreeningPolicy,
    ScreeningTest,
    Sex,
    TestKind,
    TestOutcome,
    assign_screening,
    expected_screening_cost,
    result_distribution,
)
from .errors import ConfigError, InputError
from .population import (
    ActionBreakdown,
    AgeBandShare,
    AllocationPlan,
    CohortSpec,
    Eq5dBand,
    Eq5dTable,
    MarginalIncentiveResult,
    PatientRecord,
    SegmentedCohort,
    generate_cohort,
    iterated_allocation,
    marginal_incentive,
    population_analysis,
    segment_cohort,
    thresholds_from_quantiles,
)
from .risk import (
    AgeBand,
    AgeMarginalTable,
    RiskSurrogate,
    marginal_age_risk,
    predict_risk,
)
from .seeding import patient_seed, profile_key, run_seed, run_seeds
from .utility import (
    CitizenDraw,
    CitizenModelConfig,
    EconomicConstants,
    UniformInterval,
    beta_params,
    citizen_utility,
    perceived_probability_params,
    pm_utility,
    qaly_gain,
    sample_citizen_draw,
    sample_citizen_draws,
)

__version__ = "0.1.0"
