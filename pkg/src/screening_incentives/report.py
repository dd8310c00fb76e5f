"""Result emission: delimited curve/cohort tables, JSON summaries, and SVG
figures of the acceptance and expected-utility curves.

All writers are deterministic functions of their inputs: floats are emitted
at full repr precision, JSON keys are sorted, and figures carry no
timestamps or randomized ids.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any, Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .ara import AraResult, ReplicationSummary
from .core import CovariateProfile
from .population import AllocationPlan, MarginalIncentiveResult, SegmentedCohort

CURVE_COLUMNS = ["incentive_eur", "acceptance", "psi_eur", "psi_se_eur"]
COHORT_COLUMNS = [
    "patient_id",
    "age",
    "sex",
    "smoker",
    "alcohol",
    "diabetes",
    "hypertension",
    "ses_level",
    "eq5d_index",
    "risk",
    "action",
]
ALLOCATION_COLUMNS = ["patient_id", "risk", "action", "incentive_eur", "psi_eur"]

_SVG_STYLE = {"svg.hashsalt": "screening-incentives", "svg.fonttype": "none"}


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)


def _write_json(path: Path, payload: Mapping[str, Any]) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_curve_csv(path: Path, curves) -> None:
    """Curve table for either a single-run or a population marginal result."""
    rows = zip(curves.incentives, curves.acceptance, curves.psi, curves.psi_se)
    _write_csv(path, CURVE_COLUMNS, rows)


def render_curve_figure(
    path: Path,
    curves,
    *,
    title: str,
    optimal_incentive: float,
) -> None:
    """Two-axis panel: expected utility of the incentive with a one-sigma
    band, the acceptance curve, and the optimum marked."""
    with matplotlib.rc_context(_SVG_STYLE):
        fig, ax_psi = plt.subplots(figsize=(7.0, 4.2))
        incentives = curves.incentives
        psi = curves.psi
        se = curves.psi_se
        lo = [p - s for p, s in zip(psi, se)]
        hi = [p + s for p, s in zip(psi, se)]
        ax_psi.fill_between(incentives, lo, hi, color="tab:blue", alpha=0.2, linewidth=0)
        ax_psi.plot(incentives, psi, color="tab:blue", label="expected utility")
        ax_psi.axvline(optimal_incentive, color="tab:red", linestyle=":", linewidth=1.2)
        ax_psi.axhline(0.0, color="0.6", linewidth=0.8)
        ax_psi.set_xlabel("incentive (EUR)")
        ax_psi.set_ylabel("policymaker expected utility (EUR)", color="tab:blue")
        ax_psi.tick_params(axis="y", labelcolor="tab:blue")

        ax_acc = ax_psi.twinx()
        ax_acc.plot(incentives, curves.acceptance, color="tab:green", linestyle="--",
                    label="acceptance")
        ax_acc.set_ylabel("estimated acceptance probability", color="tab:green")
        ax_acc.tick_params(axis="y", labelcolor="tab:green")
        ax_acc.set_ylim(-0.02, 1.02)

        ax_psi.set_title(title)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def write_single_outputs(
    out_dir: Path,
    *,
    profile_name: str,
    profile: CovariateProfile,
    action: str,
    risk: float,
    base: AraResult,
    replication: ReplicationSummary,
    grid: Mapping[str, float],
    cfg_hash: str,
) -> dict:
    """Write the single-patient curve CSV, JSON summary, and figure.

    The CSV holds the base run (seeded from the patient profile, matching
    population runs); the JSON adds the replication distribution of the
    optimum across independently seeded runs.
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    curve_path = out_dir / "single_curve.csv"
    summary_path = out_dir / "single_summary.json"
    figure_path = out_dir / "single_figure.svg"

    write_curve_csv(curve_path, base)
    summary = {
        "command": "single",
        "profile_name": profile_name,
        "profile": {
            "age": profile.age,
            "sex": profile.sex.value,
            "smoker": profile.smoker,
            "alcohol": profile.alcohol,
            "diabetes": profile.diabetes,
            "hypertension": profile.hypertension,
            "ses_level": profile.ses_level,
            "eq5d_index": profile.eq5d_index,
        },
        "action": action,
        "risk": risk,
        "optimal_incentive_eur": base.optimal_incentive,
        "optimal_psi_eur": base.optimal_psi,
        "k": base.k_samples,
        "n_runs": replication.n_runs,
        "master_seed": replication.master_seed,
        "base_run_seed": base.seed,
        "grid": dict(grid),
        "replication": {
            "i_star_mean": replication.i_star_mean,
            "i_star_sd": replication.i_star_sd,
            "i_star_ci90": list(replication.i_star_ci90),
            "psi_star_mean": replication.psi_star_mean,
            "psi_star_sd": replication.psi_star_sd,
            "psi_star_ci90": list(replication.psi_star_ci90),
            "i_star": list(replication.i_star),
            "psi_star": list(replication.psi_star),
            "run_seeds": list(replication.run_seeds),
        },
        "config_hash": cfg_hash,
    }
    _write_json(summary_path, summary)
    render_curve_figure(
        figure_path,
        base,
        title=f"{profile_name}: optimal incentive {base.optimal_incentive:g} EUR",
        optimal_incentive=base.optimal_incentive,
    )
    return {"curve": curve_path, "summary": summary_path, "figure": figure_path}


def write_population_outputs(
    out_dir: Path,
    *,
    cohort: Sequence[CovariateProfile],
    segmented: SegmentedCohort,
    marginal: MarginalIncentiveResult,
    plan: AllocationPlan,
    policy_thresholds: Mapping[str, Any],
    grid: Mapping[str, float],
    master_seed: int,
    k: int,
    n_runs: int,
    cfg_hash: str,
) -> dict:
    """Write the cohort table, allocation table, marginal curve CSV and
    figure, and the totals summary."""
    out_dir.mkdir(parents=True, exist_ok=True)
    cohort_path = out_dir / "cohort.csv"
    allocation_path = out_dir / "allocation.csv"
    curve_path = out_dir / "marginal_curve.csv"
    figure_path = out_dir / "marginal_figure.svg"
    summary_path = out_dir / "population_summary.json"

    cohort_rows = (
        [
            i,
            p.age,
            p.sex.value,
            int(p.smoker),
            int(p.alcohol),
            int(p.diabetes),
            int(p.hypertension),
            p.ses_level,
            p.eq5d_index,
            segmented.risks[i],
            segmented.actions[i].value,
        ]
        for i, p in enumerate(cohort)
    )
    _write_csv(cohort_path, COHORT_COLUMNS, cohort_rows)

    allocation_rows = (
        [r.patient_id, r.risk, r.action.value, r.incentive, r.psi] for r in plan.records
    )
    _write_csv(allocation_path, ALLOCATION_COLUMNS, allocation_rows)

    write_curve_csv(curve_path, marginal)
    render_curve_figure(
        figure_path,
        marginal,
        title=(
            f"common incentive over {marginal.n_screened} screened: "
            f"optimum {marginal.optimal_incentive:g} EUR"
        ),
        optimal_incentive=marginal.optimal_incentive,
    )

    summary = {
        "command": "population",
        "cohort_size": len(cohort),
        "screened": marginal.n_screened,
        "screened_fraction": marginal.n_screened / len(cohort),
        "policy": dict(policy_thresholds),
        "marginal": {
            "optimal_incentive_eur": marginal.optimal_incentive,
            "psi_per_case_eur": marginal.psi_per_case,
            "total_expense_eur": marginal.total_expense,
            "total_benefit_eur": marginal.total_benefit,
            "by_action": {
                b.action.value: {
                    "n_patients": b.n_patients,
                    "optimal_incentive_eur": b.optimal_incentive,
                    "psi_per_case_eur": b.psi_per_case,
                }
                for b in marginal.by_action
            },
        },
        "allocation": {
            "budget_eur": plan.budget,
            "total_incentive_eur": plan.total_incentive,
            "total_psi_eur": plan.total_psi,
            "patients_funded": sum(1 for r in plan.records if r.incentive > 0.0),
        },
        "k": k,
        "n_runs": n_runs,
        "master_seed": master_seed,
        "grid": dict(grid),
        "config_hash": cfg_hash,
    }
    _write_json(summary_path, summary)
    return {
        "cohort": cohort_path,
        "allocation": allocation_path,
        "curve": curve_path,
        "figure": figure_path,
        "summary": summary_path,
    }
