"""Incentive optimization engine.

The policymaker does not know the citizen's utilities or beliefs. She
models them as random quantities, draws K joint samples, and for each
candidate incentive estimates the probability that a sampled citizen
prefers accepting the proposed screening over declining. Her own expected
utility at that incentive is the acceptance probability times the exact
outcome-tree expectation of her episode utility; the optimal incentive is
the grid argmax.

The same K draws are reused across the whole incentive grid (common random
numbers). Because each draw's accept-vs-decline comparison is a threshold
rule in the incentive, this makes the estimated acceptance curve exactly
non-decreasing and greatly sharpens the argmax.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .core import (
    CitizenChoice,
    CovariateProfile,
    ScreeningAction,
    ScreeningPolicy,
    TestOutcome,
    result_distribution,
)
from .errors import ConfigError, InputError
from .risk import AgeMarginalTable
from .seeding import run_seeds
from .utility import (
    CitizenDraw,
    CitizenModelConfig,
    EconomicConstants,
    citizen_utility,
    pm_utility,
    sample_citizen_draws,
)


@dataclass(frozen=True)
class IncentiveGrid:
    """Euro grid searched for the optimal incentive: min, min+step, ..., <= max."""

    min: float = 0.0
    max: float = 500.0
    step: float = 1.0

    def __post_init__(self) -> None:
        if self.min < 0.0:
            raise ConfigError(f"grid.min: {self.min} must be >= 0")
        if not self.step > 0.0:
            raise ConfigError(f"grid.step: {self.step} must be > 0")
        if not self.min < self.max:
            raise ConfigError(f"grid.min/max: need min < max, got {self.min}, {self.max}")

    def points(self) -> np.ndarray:
        n = int(math.floor((self.max - self.min) / self.step + 1e-9)) + 1
        return self.min + self.step * np.arange(n)


@dataclass(frozen=True)
class AraResult:
    """Per-grid-point estimates and the optimal incentive of one engine run."""

    incentives: Tuple[float, ...]
    acceptance: Tuple[float, ...]
    psi: Tuple[float, ...]
    psi_se: Tuple[float, ...]
    optimal_incentive: float
    optimal_psi: float
    k_samples: int
    seed: int


@dataclass(frozen=True)
class ReplicationSummary:
    """Distribution of the optimal incentive and its value across
    independently seeded engine runs."""

    runs: Tuple[AraResult, ...]
    run_seeds: Tuple[int, ...]
    i_star: Tuple[float, ...]
    psi_star: Tuple[float, ...]
    i_star_mean: float
    i_star_sd: float
    i_star_ci90: Tuple[float, float]
    psi_star_mean: float
    psi_star_sd: float
    psi_star_ci90: Tuple[float, float]
    n_runs: int
    master_seed: int


def citizen_expected_utility(
    draw: CitizenDraw,
    choice: CitizenChoice,
    action: ScreeningAction,
    incentive: float,
    profile: CovariateProfile,
    constants: EconomicConstants,
    policy: ScreeningPolicy,
) -> float:
    """Citizen's expected utility of a choice under one sampled model.

    Exact finite sum over disease state (weighted by the draw's perceived
    probability) and the outcome distribution; no inner sampling.
    """
    p_crc = draw.perceived_crc_prob_k
    total = 0.0
    for crc, weight in ((True, p_crc), (False, 1.0 - p_crc)):
        dist = result_distribution(crc, action, choice, policy)
        inner = 0.0
        for outcome, p_outcome in dist.items():
            if p_outcome == 0.0:
                continue
            inner += p_outcome * citizen_utility(
                profile, crc, action, choice, outcome, incentive, draw, constants, policy
            )
        total += weight * inner
    return total


def citizen_accepts(
    draw: CitizenDraw,
    action: ScreeningAction,
    incentive: float,
    profile: CovariateProfile,
    constants: EconomicConstants,
    policy: ScreeningPolicy,
) -> bool:
    """Sampled citizen's decision; ties resolve to accept."""
    accept = citizen_expected_utility(
        draw, CitizenChoice.ACCEPT, action, incentive, profile, constants, policy
    )
    decline = citizen_expected_utility(
        draw, CitizenChoice.DECLINE, action, incentive, profile, constants, policy
    )
    return accept >= decline


def estimate_acceptance(
    profile: CovariateProfile,
    action: ScreeningAction,
    incentive: float,
    draws: Sequence[CitizenDraw],
    constants: EconomicConstants,
    policy: ScreeningPolicy,
) -> float:
    """Fraction of sampled citizens that accept at this incentive."""
    if not draws:
        raise InputError("draws: at least one citizen draw required")
    accepted = sum(
        1 for d in draws if citizen_accepts(d, action, incentive, profile, constants, policy)
    )
    return accepted / len(draws)


def _expected_qaly(crc: bool, outcome: TestOutcome, citizen: CitizenModelConfig) -> float:
    if crc and outcome is TestOutcome.POSITIVE:
        return citizen.qaly_detected.mean
    if crc and outcome is TestOutcome.NEGATIVE:
        return citizen.qaly_missed.mean
    return 0.0


def _pm_accept_value(
    profile: CovariateProfile,
    action: ScreeningAction,
    incentive: float,
    risk: float,
    constants: EconomicConstants,
    citizen: CitizenModelConfig,
    policy: ScreeningPolicy,
) -> float:
    """Policymaker's expected utility conditional on acceptance.

    Exact sum over disease state (model risk) and outcomes, with life-year
    effects at their distribution means; utilities are linear in the QALY
    draw, so the mean is exact.
    """
    total = 0.0
    for crc, weight in ((True, risk), (False, 1.0 - risk)):
        dist = result_distribution(crc, action, CitizenChoice.ACCEPT, policy)
        inner = 0.0
        for outcome, p_outcome in dist.items():
            if p_outcome == 0.0:
                continue
            inner += p_outcome * pm_utility(
                profile,
                crc,
                action,
                CitizenChoice.ACCEPT,
                outcome,
                incentive,
                _expected_qaly(crc, outcome, citizen),
                constants,
                policy,
            )
        total += weight * inner
    return total


def pm_expected_utility(
    profile: CovariateProfile,
    action: ScreeningAction,
    incentive: float,
    acceptance: float,
    constants: EconomicConstants,
    citizen: CitizenModelConfig,
    policy: ScreeningPolicy,
    risk: float,
) -> float:
    """Policymaker's expected utility of offering ``incentive``.

    The declined branch contributes exactly zero, so this is the acceptance
    probability times the accept-conditional expectation.
    """
    if not 0.0 <= acceptance <= 1.0:
        raise InputError(f"acceptance: {acceptance} outside [0, 1]")
    if acceptance == 0.0:
        return 0.0
    return acceptance * _pm_accept_value(
        profile, action, incentive, risk, constants, citizen, policy
    )


def _accept_net_at_zero(
    draws: Sequence[CitizenDraw],
    profile: CovariateProfile,
    action: ScreeningAction,
    constants: EconomicConstants,
    policy: ScreeningPolicy,
) -> np.ndarray:
    """Vector of per-draw accept-minus-decline utilities at zero incentive.

    The incentive enters every accepted path additively with coefficient
    one, so the accept utility at incentive I is this vector plus I; the
    declined branch is identically zero.
    """
    qm = np.array([d.qaly_missed_k for d in draws])
    qd = np.array([d.qaly_detected_k for d in draws])
    frac = np.array([d.burden_fraction_k for d in draws])
    pt = np.array([d.perceived_crc_prob_k for d in draws])

    initial = policy.initial_test(action)
    col = policy.colonoscopy()
    sens_total = initial.sensitivity * col.sensitivity
    fp_total = (1.0 - initial.specificity) * (1.0 - col.specificity)
    value_per_year = constants.gdp_per_capita * profile.eq5d_index
    base_burden = constants.burden_base * frac / initial.comfort

    u_true_pos = value_per_year * qd - (base_burden - constants.detection_relief)
    u_true_neg = value_per_year * qm - base_burden
    u_false_pos = -(base_burden - constants.detection_relief)
    u_false_neg = -base_burden

    inner_true = sens_total * u_true_pos + (1.0 - sens_total) * u_true_neg
    inner_false = fp_total * u_false_pos + (1.0 - fp_total) * u_false_neg
    return pt * inner_true + (1.0 - pt) * inner_false


def _optimize_over_grid(
    draws: Sequence[CitizenDraw],
    profile: CovariateProfile,
    action: ScreeningAction,
    grid: IncentiveGrid,
    risk: float,
    constants: EconomicConstants,
    citizen: CitizenModelConfig,
    policy: ScreeningPolicy,
    seed: int,
) -> AraResult:
    points = grid.points()
    k = len(draws)
    net_zero = _accept_net_at_zero(draws, profile, action, constants, policy)
    # shared draws across the grid: acceptance is exactly non-decreasing
    accept_counts = (points[:, None] + net_zero[None, :] >= 0.0).sum(axis=1)
    acceptance = accept_counts / k

    gain_zero = _pm_accept_value(profile, action, 0.0, risk, constants, citizen, policy)
    gain = gain_zero - points
    psi = acceptance * gain
    psi_se = np.abs(gain) * np.sqrt(acceptance * (1.0 - acceptance) / k)

    best = int(np.argmax(psi))  # first maximum: cheapest incentive among ties
    return AraResult(
        incentives=tuple(float(x) for x in points),
        acceptance=tuple(float(x) for x in acceptance),
        psi=tuple(float(x) for x in psi),
        psi_se=tuple(float(x) for x in psi_se),
        optimal_incentive=float(points[best]),
        optimal_psi=float(psi[best]),
        k_samples=k,
        seed=seed,
    )


def optimal_incentive(
    profile: CovariateProfile,
    action: ScreeningAction,
    grid: IncentiveGrid,
    k: int,
    seed: int,
    *,
    risk: float,
    constants: EconomicConstants,
    citizen: CitizenModelConfig,
    policy: ScreeningPolicy,
    age_table: AgeMarginalTable,
) -> AraResult:
    """One engine run: sample K citizen draws, estimate acceptance and the
    policymaker's expected utility on the grid, return the argmax.

    Deterministic given (seed, configuration, profile).
    """
    if action is ScreeningAction.NONE:
        raise InputError("no screening assigned")
    if k < 1:
        raise InputError(f"k: {k} must be >= 1")
    if not 0.0 <= risk <= 1.0:
        raise InputError(f"risk: {risk} outside [0, 1]")
    rng = np.random.default_rng(seed)
    draws = sample_citizen_draws(profile, citizen, age_table, rng, k)
    return _optimize_over_grid(
        draws, profile, action, grid, risk, constants, citizen, policy, seed
    )


def replicate_optimal_incentive(
    profile: CovariateProfile,
    action: ScreeningAction,
    grid: IncentiveGrid,
    k: int,
    n_runs: int,
    master_seed: int,
    *,
    risk: float,
    constants: EconomicConstants,
    citizen: CitizenModelConfig,
    policy: ScreeningPolicy,
    age_table: AgeMarginalTable,
    threads: int | None = None,
) -> ReplicationSummary:
    """Run the engine ``n_runs`` times with independently derived seeds and
    summarize the distribution of the optimal incentive and its value."""
    if n_runs < 1:
        raise InputError(f"n_runs: {n_runs} must be >= 1")
    seeds = run_seeds(master_seed, n_runs)

    def one(seed: int) -> AraResult:
        return optimal_incentive(
            profile,
            action,
            grid,
            k,
            seed,
            risk=risk,
            constants=constants,
            citizen=citizen,
            policy=policy,
            age_table=age_table,
        )

    if threads is not None and threads > 1 and n_runs > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            runs = list(pool.map(one, seeds))
    else:
        runs = [one(s) for s in seeds]

    i_star = np.array([r.optimal_incentive for r in runs])
    psi_star = np.array([r.optimal_psi for r in runs])

    def sd(values: np.ndarray) -> float:
        return float(np.std(values, ddof=1)) if len(values) > 1 else 0.0

    def ci90(values: np.ndarray) -> Tuple[float, float]:
        lo, hi = np.quantile(values, [0.05, 0.95])
        return (float(lo), float(hi))

    return ReplicationSummary(
        runs=tuple(runs),
        run_seeds=tuple(seeds),
        i_star=tuple(float(x) for x in i_star),
        psi_star=tuple(float(x) for x in psi_star),
        i_star_mean=float(np.mean(i_star)),
        i_star_sd=sd(i_star),
        i_star_ci90=ci90(i_star),
        psi_star_mean=float(np.mean(psi_star)),
        psi_star_sd=sd(psi_star),
        psi_star_ci90=ci90(psi_star),
        n_runs=n_runs,
        master_seed=master_seed,
    )
