"""Run configuration: JSON loading, strict validation, defaults, and
canonical serialization.

Every section is optional; missing sections and keys fall back to the
bundled defaults. Unknown keys are rejected so typos fail loudly, and
validation errors name the offending field path.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

from .ara import IncentiveGrid
from .core import CovariateProfile, ScreeningPolicy, ScreeningTest, Sex, TestKind
from .errors import ConfigError
from .population import AgeBandShare, CohortSpec, Eq5dBand, Eq5dTable
from .risk import AgeBand, AgeMarginalTable, RiskSurrogate
from .utility import CitizenModelConfig, EconomicConstants, UniformInterval, perceived_probability_params

DEFAULTS: Dict[str, Any] = {
    "economic": {
        "gdp_per_capita": 30968.0,
        "treatment_cost": 25955.0,
        "burden_base": 200.0,
        "detection_relief": 1000.0,
        "pm_cost_sign": -1,
    },
    "citizen": {
        "qaly_missed": [-5.0, -3.0],
        "qaly_detected": [5.0, 10.0],
        "burden_fraction": [0.6, 0.9],
        "misconception": [0.3, 0.4],
        "perceived_sd_factor": 0.1,
    },
    "risk_model": {
        "intercept": -6.2,
        "age_scale": 0.4,
        "coefficients": {
            "smoker": 0.55,
            "alcohol": 0.35,
            "diabetes": 0.45,
            "hypertension": 0.2,
            "male": 0.3,
            "ses_level": -0.05,
        },
    },
    "age_marginal_table": [
        [18, 39, 0.0004],
        [40, 49, 0.0009],
        [50, 69, 0.0025],
        [70, 100, 0.006],
    ],
    "eq5d_table": [[18, 100, 1.0, 1.0]],
    "tests": {
        "fit": {"sensitivity": 0.74, "specificity": 0.96, "unit_cost": 20.0, "comfort": 3.0},
        "sdna": {"sensitivity": 0.92, "specificity": 0.87, "unit_cost": 300.0, "comfort": 2.0},
        "colonoscopy": {"sensitivity": 0.95, "specificity": 0.99, "unit_cost": 600.0, "comfort": 1.0},
    },
    "policy": {"th1": 0.02, "th2": 0.004},
    "grid": {"min": 0.0, "max": 500.0, "step": 1.0},
    "engine": {"k": 200, "n_runs": 200, "master_seed": 1729},
    "cohort": {
        "size": 10000,
        "seed": 4242,
        "age_bands": [[18, 39, 0.35], [40, 49, 0.2], [50, 69, 0.33], [70, 100, 0.12]],
        "male": 0.5,
        "smoker": 0.25,
        "alcohol": 0.3,
        "diabetes": 0.1,
        "hypertension": 0.25,
        "ses_shares": [0.1, 0.2, 0.4, 0.2, 0.1],
    },
    "threshold_quantiles": {"sdna": 0.02, "fit": 0.12},
    "budget": None,
    "profiles": {
        "young-high-risk": {
            "age": 42,
            "sex": "male",
            "smoker": True,
            "alcohol": True,
            "diabetes": False,
            "hypertension": False,
            "ses_level": 2,
            "eq5d_index": 0.95,
        },
        "mid": {
            "age": 58,
            "sex": "female",
            "smoker": False,
            "alcohol": False,
            "diabetes": False,
            "hypertension": True,
            "ses_level": 3,
            "eq5d_index": 0.9,
        },
        "older-low-perception": {
            "age": 74,
            "sex": "female",
            "smoker": False,
            "alcohol": False,
            "diabetes": False,
            "hypertension": False,
            "ses_level": 3,
            "eq5d_index": 0.85,
        },
    },
}


@dataclass(frozen=True)
class EngineSettings:
    k: int = 200
    n_runs: int = 200
    master_seed: int = 1729

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ConfigError(f"engine.k: {self.k} must be >= 1")
        if self.n_runs < 1:
            raise ConfigError(f"engine.n_runs: {self.n_runs} must be >= 1")
        if self.master_seed < 0:
            raise ConfigError(f"engine.master_seed: {self.master_seed} must be >= 0")


@dataclass(frozen=True)
class RunConfig:
    economic: EconomicConstants
    citizen: CitizenModelConfig
    risk_model: RiskSurrogate
    age_table: AgeMarginalTable
    eq5d_table: Eq5dTable
    policy: ScreeningPolicy
    grid: IncentiveGrid
    engine: EngineSettings
    cohort: CohortSpec
    threshold_quantiles: Optional[Tuple[float, float]]
    budget: Optional[float]
    profiles: Mapping[str, CovariateProfile]


def _check_keys(section: Mapping[str, Any], allowed: set, path: str) -> None:
    unknown = sorted(set(section) - allowed)
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {unknown}; allowed: {sorted(allowed)}")


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    return float(value)


def _integer(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    return value


def _boolean(value: Any, path: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"{path}: expected a boolean, got {value!r}")
    return value


def _merged(section: Any, defaults: Mapping[str, Any], path: str) -> Dict[str, Any]:
    if section is None:
        section = {}
    if not isinstance(section, Mapping):
        raise ConfigError(f"{path}: expected an object")
    _check_keys(section, set(defaults), path)
    out = dict(defaults)
    out.update(section)
    return out


def _interval(value: Any, path: str) -> UniformInterval:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(f"{path}: expected [low, high]")
    try:
        return UniformInterval(_number(value[0], path), _number(value[1], path))
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _parse_economic(raw: Any) -> EconomicConstants:
    d = _merged(raw, DEFAULTS["economic"], "economic")
    sign = d["pm_cost_sign"]
    if sign not in (-1, 1):
        raise ConfigError("economic.pm_cost_sign: must be -1 or +1")
    return EconomicConstants(
        gdp_per_capita=_number(d["gdp_per_capita"], "economic.gdp_per_capita"),
        treatment_cost=_number(d["treatment_cost"], "economic.treatment_cost"),
        burden_base=_number(d["burden_base"], "economic.burden_base"),
        detection_relief=_number(d["detection_relief"], "economic.detection_relief"),
        pm_cost_sign=int(sign),
    )


def _parse_citizen(raw: Any) -> CitizenModelConfig:
    d = _merged(raw, DEFAULTS["citizen"], "citizen")
    return CitizenModelConfig(
        qaly_missed=_interval(d["qaly_missed"], "citizen.qaly_missed"),
        qaly_detected=_interval(d["qaly_detected"], "citizen.qaly_detected"),
        burden_fraction=_interval(d["burden_fraction"], "citizen.burden_fraction"),
        misconception=_interval(d["misconception"], "citizen.misconception"),
        perceived_sd_factor=_number(d["perceived_sd_factor"], "citizen.perceived_sd_factor"),
    )


def _parse_risk_model(raw: Any) -> RiskSurrogate:
    d = _merged(raw, DEFAULTS["risk_model"], "risk_model")
    coefficients = d["coefficients"]
    if not isinstance(coefficients, Mapping):
        raise ConfigError("risk_model.coefficients: expected an object")
    coeffs = {
        str(name): _number(value, f"risk_model.coefficients.{name}")
        for name, value in coefficients.items()
    }
    return RiskSurrogate(
        intercept=_number(d["intercept"], "risk_model.intercept"),
        coefficients=coeffs,
        age_scale=_number(d["age_scale"], "risk_model.age_scale"),
    )


def _parse_age_table(raw: Any) -> AgeMarginalTable:
    rows = DEFAULTS["age_marginal_table"] if raw is None else raw
    if not isinstance(rows, list):
        raise ConfigError("age_marginal_table: expected a list of [low, high, probability]")
    bands = []
    for i, row in enumerate(rows):
        path = f"age_marginal_table[{i}]"
        if not isinstance(row, (list, tuple)) or len(row) != 3:
            raise ConfigError(f"{path}: expected [low, high, probability]")
        bands.append(
            AgeBand(
                _integer(row[0], f"{path}.low"),
                _integer(row[1], f"{path}.high"),
                _number(row[2], f"{path}.probability"),
            )
        )
    return AgeMarginalTable(bands=tuple(bands))


def _parse_eq5d(raw: Any) -> Eq5dTable:
    rows = DEFAULTS["eq5d_table"] if raw is None else raw
    if not isinstance(rows, list):
        raise ConfigError("eq5d_table: expected a list of [low, high, male, female]")
    bands = []
    for i, row in enumerate(rows):
        path = f"eq5d_table[{i}]"
        if not isinstance(row, (list, tuple)) or len(row) != 4:
            raise ConfigError(f"{path}: expected [low, high, male, female]")
        bands.append(
            Eq5dBand(
                _integer(row[0], f"{path}.low"),
                _integer(row[1], f"{path}.high"),
                _number(row[2], f"{path}.male"),
                _number(row[3], f"{path}.female"),
            )
        )
    return Eq5dTable(bands=tuple(bands))


def _parse_tests(raw: Any) -> Dict[TestKind, ScreeningTest]:
    d = _merged(raw, DEFAULTS["tests"], "tests")
    tests = {}
    for name in ("fit", "sdna", "colonoscopy"):
        entry = _merged(d[name], DEFAULTS["tests"][name], f"tests.{name}")
        kind = TestKind(name)
        tests[kind] = ScreeningTest(
            kind=kind,
            sensitivity=_number(entry["sensitivity"], f"tests.{name}.sensitivity"),
            specificity=_number(entry["specificity"], f"tests.{name}.specificity"),
            unit_cost=_number(entry["unit_cost"], f"tests.{name}.unit_cost"),
            comfort=_number(entry["comfort"], f"tests.{name}.comfort"),
        )
    return tests


def _parse_policy(raw: Any, tests: Dict[TestKind, ScreeningTest]) -> ScreeningPolicy:
    d = _merged(raw, DEFAULTS["policy"], "policy")
    return ScreeningPolicy(
        th1=_number(d["th1"], "policy.th1"),
        th2=_number(d["th2"], "policy.th2"),
        tests=tests,
    )


def _parse_grid(raw: Any) -> IncentiveGrid:
    d = _merged(raw, DEFAULTS["grid"], "grid")
    return IncentiveGrid(
        min=_number(d["min"], "grid.min"),
        max=_number(d["max"], "grid.max"),
        step=_number(d["step"], "grid.step"),
    )


def _parse_engine(raw: Any) -> EngineSettings:
    d = _merged(raw, DEFAULTS["engine"], "engine")
    return EngineSettings(
        k=_integer(d["k"], "engine.k"),
        n_runs=_integer(d["n_runs"], "engine.n_runs"),
        master_seed=_integer(d["master_seed"], "engine.master_seed"),
    )


def _parse_cohort(raw: Any) -> CohortSpec:
    d = _merged(raw, DEFAULTS["cohort"], "cohort")
    rows = d["age_bands"]
    if not isinstance(rows, list) or not rows:
        raise ConfigError("cohort.age_bands: expected a non-empty list of [low, high, share]")
    bands = []
    for i, row in enumerate(rows):
        path = f"cohort.age_bands[{i}]"
        if not isinstance(row, (list, tuple)) or len(row) != 3:
            raise ConfigError(f"{path}: expected [low, high, share]")
        bands.append(
            AgeBandShare(
                _integer(row[0], f"{path}.low"),
                _integer(row[1], f"{path}.high"),
                _number(row[2], f"{path}.share"),
            )
        )
    shares = d["ses_shares"]
    if not isinstance(shares, (list, tuple)) or len(shares) != 5:
        raise ConfigError("cohort.ses_shares: expected five shares")
    return CohortSpec(
        size=_integer(d["size"], "cohort.size"),
        seed=_integer(d["seed"], "cohort.seed"),
        age_bands=tuple(bands),
        male=_number(d["male"], "cohort.male"),
        smoker=_number(d["smoker"], "cohort.smoker"),
        alcohol=_number(d["alcohol"], "cohort.alcohol"),
        diabetes=_number(d["diabetes"], "cohort.diabetes"),
        hypertension=_number(d["hypertension"], "cohort.hypertension"),
        ses_shares=tuple(_number(s, f"cohort.ses_shares[{i}]") for i, s in enumerate(shares)),
    )


def _parse_quantiles(raw: Any) -> Optional[Tuple[float, float]]:
    if raw is None:
        return None
    if not isinstance(raw, Mapping):
        raise ConfigError("threshold_quantiles: expected an object or null")
    _check_keys(raw, {"sdna", "fit"}, "threshold_quantiles")
    if "sdna" not in raw or "fit" not in raw:
        raise ConfigError("threshold_quantiles: both 'sdna' and 'fit' shares required")
    return (
        _number(raw["sdna"], "threshold_quantiles.sdna"),
        _number(raw["fit"], "threshold_quantiles.fit"),
    )


PROFILE_KEYS = {
    "age",
    "sex",
    "smoker",
    "alcohol",
    "diabetes",
    "hypertension",
    "ses_level",
    "eq5d_index",
}


def parse_profile(raw: Any, path: str, eq5d_table: Eq5dTable) -> CovariateProfile:
    """Build a profile from a config or inline JSON object; when
    eq5d_index is omitted the table value for (age, sex) applies."""
    if not isinstance(raw, Mapping):
        raise ConfigError(f"{path}: expected an object")
    _check_keys(raw, PROFILE_KEYS, path)
    for key in ("age", "sex", "smoker", "alcohol", "diabetes", "hypertension", "ses_level"):
        if key not in raw:
            raise ConfigError(f"{path}.{key}: required")
    sex_raw = raw["sex"]
    try:
        sex = Sex(sex_raw)
    except ValueError:
        raise ConfigError(f"{path}.sex: expected 'male' or 'female', got {sex_raw!r}") from None
    age = _integer(raw["age"], f"{path}.age")
    if "eq5d_index" in raw:
        eq5d = _number(raw["eq5d_index"], f"{path}.eq5d_index")
    else:
        eq5d = eq5d_table.lookup(age, sex)
    try:
        return CovariateProfile(
            age=age,
            sex=sex,
            smoker=_boolean(raw["smoker"], f"{path}.smoker"),
            alcohol=_boolean(raw["alcohol"], f"{path}.alcohol"),
            diabetes=_boolean(raw["diabetes"], f"{path}.diabetes"),
            hypertension=_boolean(raw["hypertension"], f"{path}.hypertension"),
            ses_level=_integer(raw["ses_level"], f"{path}.ses_level"),
            eq5d_index=eq5d,
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def from_dict(data: Mapping[str, Any]) -> RunConfig:
    """Build a fully validated RunConfig, applying defaults for anything
    missing and rejecting unknown keys."""
    if not isinstance(data, Mapping):
        raise ConfigError("config: expected a JSON object at top level")
    _check_keys(data, set(DEFAULTS), "config")

    economic = _parse_economic(data.get("economic"))
    citizen = _parse_citizen(data.get("citizen"))
    risk_model = _parse_risk_model(data.get("risk_model"))
    age_table = _parse_age_table(data.get("age_marginal_table"))
    eq5d_table = _parse_eq5d(data.get("eq5d_table"))
    tests = _parse_tests(data.get("tests"))
    policy = _parse_policy(data.get("policy"), tests)
    grid = _parse_grid(data.get("grid"))
    engine = _parse_engine(data.get("engine"))
    cohort = _parse_cohort(data.get("cohort"))
    quantiles = _parse_quantiles(data.get("threshold_quantiles", DEFAULTS["threshold_quantiles"]))
    budget_raw = data.get("budget", DEFAULTS["budget"])
    budget = None if budget_raw is None else _number(budget_raw, "budget")
    if budget is not None and budget < 0.0:
        raise ConfigError(f"budget: {budget} must be >= 0")

    profiles_raw = data.get("profiles", DEFAULTS["profiles"])
    if not isinstance(profiles_raw, Mapping):
        raise ConfigError("profiles: expected an object")
    profiles = {
        str(name): parse_profile(entry, f"profiles.{name}", eq5d_table)
        for name, entry in profiles_raw.items()
    }

    # surface an infeasible perceived-probability model at load time
    for band in age_table.bands:
        try:
            perceived_probability_params(
                band.probability, citizen.misconception.low, citizen.perceived_sd_factor
            )
        except ConfigError as exc:
            raise ConfigError(
                f"age_marginal_table band [{band.low}, {band.high}]: {exc}"
            ) from None

    return RunConfig(
        economic=economic,
        citizen=citizen,
        risk_model=risk_model,
        age_table=age_table,
        eq5d_table=eq5d_table,
        policy=policy,
        grid=grid,
        engine=engine,
        cohort=cohort,
        threshold_quantiles=quantiles,
        budget=budget,
        profiles=profiles,
    )


def to_dict(cfg: RunConfig) -> Dict[str, Any]:
    """Canonical plain-data form of a RunConfig; loading it back yields an
    equal RunConfig."""
    return {
        "economic": {
            "gdp_per_capita": cfg.economic.gdp_per_capita,
            "treatment_cost": cfg.economic.treatment_cost,
            "burden_base": cfg.economic.burden_base,
            "detection_relief": cfg.economic.detection_relief,
            "pm_cost_sign": cfg.economic.pm_cost_sign,
        },
        "citizen": {
            "qaly_missed": [cfg.citizen.qaly_missed.low, cfg.citizen.qaly_missed.high],
            "qaly_detected": [cfg.citizen.qaly_detected.low, cfg.citizen.qaly_detected.high],
            "burden_fraction": [
                cfg.citizen.burden_fraction.low,
                cfg.citizen.burden_fraction.high,
            ],
            "misconception": [cfg.citizen.misconception.low, cfg.citizen.misconception.high],
            "perceived_sd_factor": cfg.citizen.perceived_sd_factor,
        },
        "risk_model": {
            "intercept": cfg.risk_model.intercept,
            "age_scale": cfg.risk_model.age_scale,
            "coefficients": dict(cfg.risk_model.coefficients),
        },
        "age_marginal_table": [[b.low, b.high, b.probability] for b in cfg.age_table.bands],
        "eq5d_table": [[b.low, b.high, b.male, b.female] for b in cfg.eq5d_table.bands],
        "tests": {
            kind.value: {
                "sensitivity": test.sensitivity,
                "specificity": test.specificity,
                "unit_cost": test.unit_cost,
                "comfort": test.comfort,
            }
            for kind, test in sorted(cfg.policy.tests.items(), key=lambda kv: kv[0].value)
        },
        "policy": {"th1": cfg.policy.th1, "th2": cfg.policy.th2},
        "grid": {"min": cfg.grid.min, "max": cfg.grid.max, "step": cfg.grid.step},
        "engine": {
            "k": cfg.engine.k,
            "n_runs": cfg.engine.n_runs,
            "master_seed": cfg.engine.master_seed,
        },
        "cohort": {
            "size": cfg.cohort.size,
            "seed": cfg.cohort.seed,
            "age_bands": [[b.low, b.high, b.share] for b in cfg.cohort.age_bands],
            "male": cfg.cohort.male,
            "smoker": cfg.cohort.smoker,
            "alcohol": cfg.cohort.alcohol,
            "diabetes": cfg.cohort.diabetes,
            "hypertension": cfg.cohort.hypertension,
            "ses_shares": list(cfg.cohort.ses_shares),
        },
        "threshold_quantiles": (
            None
            if cfg.threshold_quantiles is None
            else {"sdna": cfg.threshold_quantiles[0], "fit": cfg.threshold_quantiles[1]}
        ),
        "budget": cfg.budget,
        "profiles": {
            name: {
                "age": p.age,
                "sex": p.sex.value,
                "smoker": p.smoker,
                "alcohol": p.alcohol,
                "diabetes": p.diabetes,
                "hypertension": p.hypertension,
                "ses_level": p.ses_level,
                "eq5d_index": p.eq5d_index,
            }
            for name, p in cfg.profiles.items()
        },
    }


def default_config() -> RunConfig:
    return from_dict({})


def load_config(path: Optional[str | Path]) -> RunConfig:
    """Load and validate a JSON run configuration; None means defaults."""
    if path is None:
        return default_config()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"config file {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path}: invalid JSON ({exc})") from None
    return from_dict(data)


def config_hash(cfg: RunConfig) -> str:
    """Hash of the fully resolved configuration, for output provenance."""
    canonical = json.dumps(to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def with_overrides(
    cfg: RunConfig,
    *,
    seed: Optional[int] = None,
    k: Optional[int] = None,
    n_runs: Optional[int] = None,
    budget: Optional[float] = None,
    budget_given: bool = False,
) -> RunConfig:
    """Apply command-line overrides onto a loaded configuration."""
    engine = cfg.engine
    if seed is not None:
        engine = replace(engine, master_seed=seed)
    if k is not None:
        engine = replace(engine, k=k)
    if n_runs is not None:
        engine = replace(engine, n_runs=n_runs)
    out = replace(cfg, engine=engine)
    if budget_given:
        if budget is not None and budget < 0.0:
            raise ConfigError(f"budget: {budget} must be >= 0")
        out = replace(out, budget=budget)
    return out
