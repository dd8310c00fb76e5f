"""Cohort generation, risk-based segmentation, and the two population-level
incentive schemes: a budget-constrained per-patient allocation and a single
marginalized incentive common to all screened members.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .ara import AraResult, IncentiveGrid, _accept_net_at_zero, _optimize_over_grid, _pm_accept_value
from .core import CovariateProfile, ScreeningAction, ScreeningPolicy, Sex, assign_screening
from .errors import ConfigError, InputError
from .risk import AgeMarginalTable, RiskSurrogate, predict_risk
from .seeding import patient_seed
from .utility import CitizenModelConfig, EconomicConstants, sample_citizen_draws


@dataclass(frozen=True)
class AgeBandShare:
    low: int
    high: int
    share: float


@dataclass(frozen=True)
class CohortSpec:
    """Marginal distributions a synthetic cohort is drawn from."""

    size: int
    seed: int
    age_bands: Tuple[AgeBandShare, ...]
    male: float
    smoker: float
    alcohol: float
    diabetes: float
    hypertension: float
    ses_shares: Tuple[float, float, float, float, float]

    def __post_init__(self) -> None:
        if self.size < 1:
            raise ConfigError(f"cohort.size: {self.size} must be >= 1")
        if not self.age_bands:
            raise ConfigError("cohort.age_bands: at least one band required")
        for band in self.age_bands:
            if not (18 <= band.low <= band.high <= 100):
                raise ConfigError(
                    f"cohort.age_bands: band [{band.low}, {band.high}] outside [18, 100]"
                )
            if band.share < 0.0:
                raise ConfigError("cohort.age_bands: shares must be >= 0")
        if abs(sum(b.share for b in self.age_bands) - 1.0) > 1e-9:
            raise ConfigError("cohort.age_bands: shares must sum to 1")
        for name in ("male", "smoker", "alcohol", "diabetes", "hypertension"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"cohort.{name}: {value} outside [0, 1]")
        if len(self.ses_shares) != 5:
            raise ConfigError("cohort.ses_shares: exactly five shares required")
        if any(s < 0.0 for s in self.ses_shares):
            raise ConfigError("cohort.ses_shares: shares must be >= 0")
        if abs(sum(self.ses_shares) - 1.0) > 1e-9:
            raise ConfigError("cohort.ses_shares: shares must sum to 1")


@dataclass(frozen=True)
class Eq5dBand:
    low: int
    high: int
    male: float
    female: float


@dataclass(frozen=True)
class Eq5dTable:
    """Health utility index by age band and sex; defaults to 1.0 everywhere."""

    bands: Tuple[Eq5dBand, ...] = (Eq5dBand(18, 100, 1.0, 1.0),)

    def __post_init__(self) -> None:
        prev_high = 17
        for band in self.bands:
            where = f"eq5d_table band [{band.low}, {band.high}]"
            if band.low != prev_high + 1:
                raise ConfigError(f"{where}: bands must partition [18, 100]")
            if band.high < band.low:
                raise ConfigError(f"{where}: high < low")
            for label, value in (("male", band.male), ("female", band.female)):
                if not 0.0 < value <= 1.0:
                    raise ConfigError(f"{where}.{label}: must be in (0, 1]")
            prev_high = band.high
        if prev_high != 100:
            raise ConfigError("eq5d_table: bands must end at age 100")

    def lookup(self, age: int, sex: Sex) -> float:
        for band in self.bands:
            if band.low <= age <= band.high:
                return band.male if sex is Sex.MALE else band.female
        raise InputError(f"age: {age} not covered by eq5d_table")


def generate_cohort(
    spec: CohortSpec, eq5d_table: Optional[Eq5dTable] = None
) -> List[CovariateProfile]:
    """Draw ``spec.size`` profiles independently from the marginals.

    All random vectors are drawn in a fixed order (age band, age within
    band, sex, smoker, alcohol, diabetes, hypertension, SES), so the cohort
    is a deterministic function of the seed.
    """
    table = eq5d_table if eq5d_table is not None else Eq5dTable()
    rng = np.random.default_rng(spec.seed)
    n = spec.size
    shares = np.array([b.share for b in spec.age_bands])
    band_idx = rng.choice(len(spec.age_bands), size=n, p=shares)
    lows = np.array([b.low for b in spec.age_bands])[band_idx]
    highs = np.array([b.high for b in spec.age_bands])[band_idx]
    ages = rng.integers(lows, highs, endpoint=True)
    male = rng.random(n) < spec.male
    smoker = rng.random(n) < spec.smoker
    alcohol = rng.random(n) < spec.alcohol
    diabetes = rng.random(n) < spec.diabetes
    hypertension = rng.random(n) < spec.hypertension
    ses = rng.choice(5, size=n, p=np.array(spec.ses_shares)) + 1

    cohort = []
    for i in range(n):
        sex = Sex.MALE if male[i] else Sex.FEMALE
        age = int(ages[i])
        cohort.append(
            CovariateProfile(
                age=age,
                sex=sex,
                smoker=bool(smoker[i]),
                alcohol=bool(alcohol[i]),
                diabetes=bool(diabetes[i]),
                hypertension=bool(hypertension[i]),
                ses_level=int(ses[i]),
                eq5d_index=table.lookup(age, sex),
            )
        )
    return cohort


@dataclass(frozen=True)
class SegmentedCohort:
    """Risk estimates, screening assignments, and the descending-risk walk
    order (stable: ties keep patient-id order)."""

    risks: Tuple[float, ...]
    actions: Tuple[ScreeningAction, ...]
    order: Tuple[int, ...]


def segment_cohort(
    cohort: Sequence[CovariateProfile],
    model: RiskSurrogate,
    policy: ScreeningPolicy,
) -> SegmentedCohort:
    """Predict each member's risk, assign the screening action, and order
    patients by risk descending."""
    if not cohort:
        raise InputError("cohort: must be non-empty")
    risks = [predict_risk(p, model) for p in cohort]
    actions = [assign_screening(r, policy) for r in risks]
    order = np.argsort(-np.array(risks), kind="stable")
    return SegmentedCohort(
        risks=tuple(risks),
        actions=tuple(actions),
        order=tuple(int(i) for i in order),
    )


def thresholds_from_quantiles(
    risks: Sequence[float], sdna_share: float = 0.02, fit_share: float = 0.12
) -> Tuple[float, float]:
    """Policy thresholds placed at cohort risk quantiles so the top
    ``sdna_share`` of members get the sDNA cascade and the next
    ``fit_share`` the FIT cascade."""
    if not 0.0 < sdna_share < 1.0 or not 0.0 < fit_share < 1.0:
        raise ConfigError("threshold_quantiles: shares must be in (0, 1)")
    if sdna_share + fit_share >= 1.0:
        raise ConfigError("threshold_quantiles: shares must sum to < 1")
    values = np.array(risks)
    th1 = float(np.quantile(values, 1.0 - sdna_share))
    th2 = float(np.quantile(values, 1.0 - sdna_share - fit_share))
    if not 0.0 < th2 < th1 < 1.0:
        raise ConfigError(
            f"threshold_quantiles: derived thresholds invalid (th1={th1}, th2={th2})"
        )
    return th1, th2


@dataclass(frozen=True)
class PatientRecord:
    patient_id: int
    risk: float
    action: ScreeningAction
    incentive: float
    psi: float


@dataclass(frozen=True)
class AllocationPlan:
    """Per-patient incentive assignments (in descending-risk walk order)
    and their totals."""

    records: Tuple[PatientRecord, ...]
    n_screened: int
    total_incentive: float
    total_psi: float
    budget: Optional[float]


@dataclass(frozen=True)
class ActionBreakdown:
    action: ScreeningAction
    n_patients: int
    optimal_incentive: float
    psi_per_case: float


@dataclass(frozen=True)
class MarginalIncentiveResult:
    """Common-incentive curves averaged over all screened members."""

    incentives: Tuple[float, ...]
    acceptance: Tuple[float, ...]
    psi: Tuple[float, ...]
    psi_se: Tuple[float, ...]
    optimal_incentive: float
    psi_per_case: float
    n_screened: int
    total_expense: float
    total_benefit: float
    by_action: Tuple[ActionBreakdown, ...]
    k_samples: int
    master_seed: int


@dataclass(frozen=True)
class _PatientRun:
    """Engine run of one screened patient plus the pieces needed to price
    an arbitrary off-optimum incentive."""

    result: AraResult
    net_zero: np.ndarray
    gain_zero: float

    def psi_at(self, incentive: float) -> float:
        acceptance = float(np.count_nonzero(self.net_zero + incentive >= 0.0)) / len(
            self.net_zero
        )
        return acceptance * (self.gain_zero - incentive)


def _run_patient(
    profile: CovariateProfile,
    action: ScreeningAction,
    risk: float,
    grid: IncentiveGrid,
    k: int,
    master_seed: int,
    constants: EconomicConstants,
    citizen: CitizenModelConfig,
    policy: ScreeningPolicy,
    age_table: AgeMarginalTable,
) -> _PatientRun:
    seed = patient_seed(master_seed, profile)
    rng = np.random.default_rng(seed)
    draws = sample_citizen_draws(profile, citizen, age_table, rng, k)
    result = _optimize_over_grid(
        draws, profile, action, grid, risk, constants, citizen, policy, seed
    )
    net_zero = _accept_net_at_zero(draws, profile, action, constants, policy)
    gain_zero = _pm_accept_value(profile, action, 0.0, risk, constants, citizen, policy)
    return _PatientRun(result=result, net_zero=net_zero, gain_zero=gain_zero)


def _patient_runs(
    cohort: Sequence[CovariateProfile],
    segmented: SegmentedCohort,
    grid: IncentiveGrid,
    k: int,
    master_seed: int,
    constants: EconomicConstants,
    citizen: CitizenModelConfig,
    policy: ScreeningPolicy,
    age_table: AgeMarginalTable,
    threads: Optional[int],
) -> Dict[int, _PatientRun]:
    screened = [
        i for i in range(len(cohort)) if segmented.actions[i] is not ScreeningAction.NONE
    ]

    def one(i: int) -> _PatientRun:
        return _run_patient(
            cohort[i],
            segmented.actions[i],
            segmented.risks[i],
            grid,
            k,
            master_seed,
            constants,
            citizen,
            policy,
            age_table,
        )

    if threads is not None and threads > 1 and len(screened) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            runs = list(pool.map(one, screened))
    else:
        runs = [one(i) for i in screened]
    return dict(zip(screened, runs))


def _allocate_from_runs(
    segmented: SegmentedCohort,
    runs: Dict[int, _PatientRun],
    budget: Optional[float],
) -> AllocationPlan:
    """Greedy walk in descending risk: fund each patient's own optimal
    incentive while it fits the remaining budget, otherwise record the
    patient with no incentive and keep walking."""
    if budget is not None and budget < 0.0:
        raise InputError(f"budget: {budget} must be >= 0")
    spent = 0.0
    total_psi = 0.0
    records = []
    for i in segmented.order:
        action = segmented.actions[i]
        if action is ScreeningAction.NONE:
            records.append(PatientRecord(i, segmented.risks[i], action, 0.0, 0.0))
            continue
        run = runs[i]
        wanted = run.result.optimal_incentive
        if budget is None or spent + wanted <= budget:
            incentive, psi = wanted, run.result.optimal_psi
            spent += wanted
        else:
            incentive, psi = 0.0, run.psi_at(0.0)
        total_psi += psi
        records.append(PatientRecord(i, segmented.risks[i], action, incentive, psi))
    return AllocationPlan(
        records=tuple(records),
        n_screened=len(runs),
        total_incentive=spent,
        total_psi=total_psi,
        budget=budget,
    )


def _marginal_from_runs(
    segmented: SegmentedCohort,
    runs: Dict[int, _PatientRun],
    grid: IncentiveGrid,
    k: int,
    master_seed: int,
) -> MarginalIncentiveResult:
    ids = sorted(runs)
    acc = np.array([runs[i].result.acceptance for i in ids])
    psi = np.array([runs[i].result.psi for i in ids])
    se = np.array([runs[i].result.psi_se for i in ids])
    n = len(ids)

    psi_pop = psi.mean(axis=0)
    acc_pop = acc.mean(axis=0)
    se_pop = np.sqrt((se**2).sum(axis=0)) / n

    points = grid.points()
    best = int(np.argmax(psi_pop))
    i_star = float(points[best])

    breakdowns = []
    for action in (ScreeningAction.SDNA_CASCADE, ScreeningAction.FIT_CASCADE):
        members = [j for j, i in enumerate(ids) if segmented.actions[i] is action]
        if not members:
            continue
        sub = psi[members].mean(axis=0)
        sub_best = int(np.argmax(sub))
        breakdowns.append(
            ActionBreakdown(
                action=action,
                n_patients=len(members),
                optimal_incentive=float(points[sub_best]),
                psi_per_case=float(sub[sub_best]),
            )
        )

    return MarginalIncentiveResult(
        incentives=tuple(float(x) for x in points),
        acceptance=tuple(float(x) for x in acc_pop),
        psi=tuple(float(x) for x in psi_pop),
        psi_se=tuple(float(x) for x in se_pop),
        optimal_incentive=i_star,
        psi_per_case=float(psi_pop[best]),
        n_screened=n,
        total_expense=i_star * n,
        total_benefit=float(psi[:, best].sum()),
        by_action=tuple(breakdowns),
        k_samples=k,
        master_seed=master_seed,
    )


def iterated_allocation(
    cohort: Sequence[CovariateProfile],
    segmented: SegmentedCohort,
    grid: IncentiveGrid,
    k: int,
    budget: Optional[float],
    master_seed: int,
    *,
    constants: EconomicConstants,
    citizen: CitizenModelConfig,
    policy: ScreeningPolicy,
    age_table: AgeMarginalTable,
    threads: Optional[int] = None,
) -> AllocationPlan:
    """Per-patient incentives under a budget, walking descending risk.

    Total spending never exceeds the budget; over-budget patients are
    skipped (recorded with incentive zero) and the walk continues.
    """
    runs = _patient_runs(
        cohort, segmented, grid, k, master_seed, constants, citizen, policy, age_table, threads
    )
    return _allocate_from_runs(segmented, runs, budget)


def marginal_incentive(
    cohort: Sequence[CovariateProfile],
    segmented: SegmentedCohort,
    grid: IncentiveGrid,
    k: int,
    master_seed: int,
    *,
    constants: EconomicConstants,
    citizen: CitizenModelConfig,
    policy: ScreeningPolicy,
    age_table: AgeMarginalTable,
    threads: Optional[int] = None,
) -> MarginalIncentiveResult:
    """One common incentive for everyone assigned a screening action.

    The population curve at each grid point is the arithmetic mean of the
    members' expected-utility curves, each under its own action and risk;
    the optimum is the grid argmax (lowest incentive among ties).
    """
    if all(a is ScreeningAction.NONE for a in segmented.actions):
        raise InputError("no screened patients")
    runs = _patient_runs(
        cohort, segmented, grid, k, master_seed, constants, citizen, policy, age_table, threads
    )
    return _marginal_from_runs(segmented, runs, grid, k, master_seed)


def population_analysis(
    cohort: Sequence[CovariateProfile],
    segmented: SegmentedCohort,
    grid: IncentiveGrid,
    k: int,
    budget: Optional[float],
    master_seed: int,
    *,
    constants: EconomicConstants,
    citizen: CitizenModelConfig,
    policy: ScreeningPolicy,
    age_table: AgeMarginalTable,
    threads: Optional[int] = None,
) -> Tuple[MarginalIncentiveResult, AllocationPlan]:
    """Marginal incentive and budgeted allocation from one shared set of
    per-patient engine runs."""
    if all(a is ScreeningAction.NONE for a in segmented.actions):
        raise InputError("no screened patients")
    runs = _patient_runs(
        cohort, segmented, grid, k, master_seed, constants, citizen, policy, age_table, threads
    )
    marginal = _marginal_from_runs(segmented, runs, grid, k, master_seed)
    plan = _allocate_from_runs(segmented, runs, budget)
    return marginal, plan
