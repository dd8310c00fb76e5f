"""Command-line entry points: ``single`` for one patient, ``population``
for a synthetic cohort.

Outputs are deterministic functions of the configuration file and the
flags; thread count never changes results. Failures print one
machine-readable JSON line to stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional

from .ara import optimal_incentive, replicate_optimal_incentive
from .config import (
    RunConfig,
    config_hash,
    load_config,
    parse_profile,
    with_overrides,
)
from .core import ScreeningAction, assign_screening
from .errors import ConfigError, InputError
from .population import generate_cohort, population_analysis, segment_cohort, thresholds_from_quantiles
from .report import write_population_outputs, write_single_outputs
from .risk import predict_risk
from .seeding import patient_seed


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="screening-incentives",
        description=(
            "Optimal financial incentives for screening participation, "
            "for a single patient or a synthetic cohort."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", metavar="PATH", default=None,
                       help="JSON run configuration (defaults used when omitted)")
        p.add_argument("--out", metavar="DIR", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the master seed")
        p.add_argument("--k", type=int, default=None, help="override the per-run sample count")
        p.add_argument("--runs", type=int, default=None, help="override the replication count")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (default: machine parallelism)")

    p_single = sub.add_parser("single", help="optimize the incentive for one patient")
    common(p_single)
    p_single.add_argument(
        "--profile",
        metavar="JSON",
        required=True,
        help="bundled profile name, or an inline JSON object",
    )

    p_pop = sub.add_parser("population", help="cohort generation, allocation, and the common incentive")
    common(p_pop)
    p_pop.add_argument("--budget", type=float, default=None, metavar="EUR",
                       help="incentive budget for the per-patient allocation")
    return parser


def _resolve_threads(threads: Optional[int]) -> int:
    if threads is not None:
        if threads < 1:
            raise InputError(f"threads: {threads} must be >= 1")
        return threads
    return os.cpu_count() or 1


def _resolve_profile(cfg: RunConfig, selector: str):
    text = selector.strip()
    if text.startswith("{"):
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"--profile: invalid JSON ({exc})") from None
        return "inline", parse_profile(raw, "profile", cfg.eq5d_table)
    if text in cfg.profiles:
        return text, cfg.profiles[text]
    raise InputError(
        f"--profile: unknown profile {text!r}; bundled profiles: {sorted(cfg.profiles)}"
    )


def run_single(args: argparse.Namespace) -> int:
    cfg = with_overrides(
        load_config(args.config), seed=args.seed, k=args.k, n_runs=args.runs
    )
    threads = _resolve_threads(args.threads)
    name, profile = _resolve_profile(cfg, args.profile)
    risk = predict_risk(profile, cfg.risk_model)
    action = assign_screening(risk, cfg.policy)
    if action is ScreeningAction.NONE:
        raise InputError(
            f"no screening assigned: risk {risk:.6g} is not above th2 {cfg.policy.th2:g}"
        )

    model = dict(
        risk=risk,
        constants=cfg.economic,
        citizen=cfg.citizen,
        policy=cfg.policy,
        age_table=cfg.age_table,
    )
    base = optimal_incentive(
        profile,
        action,
        cfg.grid,
        cfg.engine.k,
        patient_seed(cfg.engine.master_seed, profile),
        **model,
    )
    replication = replicate_optimal_incentive(
        profile,
        action,
        cfg.grid,
        cfg.engine.k,
        cfg.engine.n_runs,
        cfg.engine.master_seed,
        threads=threads,
        **model,
    )
    paths = write_single_outputs(
        Path(args.out),
        profile_name=name,
        profile=profile,
        action=action.value,
        risk=risk,
        base=base,
        replication=replication,
        grid={"min": cfg.grid.min, "max": cfg.grid.max, "step": cfg.grid.step},
        cfg_hash=config_hash(cfg),
    )
    print(
        f"single: profile={name} action={action.value} "
        f"I*={base.optimal_incentive:g} EUR psi*={base.optimal_psi:.2f} EUR "
        f"(replication mean I* {replication.i_star_mean:.2f})"
    )
    print(f"wrote {paths['curve']}, {paths['summary']}, {paths['figure']}")
    return 0


def run_population(args: argparse.Namespace) -> int:
    cfg = with_overrides(
        load_config(args.config),
        seed=args.seed,
        k=args.k,
        n_runs=args.runs,
        budget=args.budget,
        budget_given=args.budget is not None,
    )
    threads = _resolve_threads(args.threads)
    cohort = generate_cohort(cfg.cohort, cfg.eq5d_table)

    policy = cfg.policy
    derived = False
    if cfg.threshold_quantiles is not None:
        risks = [predict_risk(p, cfg.risk_model) for p in cohort]
        th1, th2 = thresholds_from_quantiles(risks, *cfg.threshold_quantiles)
        policy = replace(policy, th1=th1, th2=th2)
        derived = True
    segmented = segment_cohort(cohort, cfg.risk_model, policy)

    marginal, plan = population_analysis(
        cohort,
        segmented,
        cfg.grid,
        cfg.engine.k,
        cfg.budget,
        cfg.engine.master_seed,
        constants=cfg.economic,
        citizen=cfg.citizen,
        policy=policy,
        age_table=cfg.age_table,
        threads=threads,
    )
    paths = write_population_outputs(
        Path(args.out),
        cohort=cohort,
        segmented=segmented,
        marginal=marginal,
        plan=plan,
        policy_thresholds={
            "th1": policy.th1,
            "th2": policy.th2,
            "derived_from_quantiles": derived,
        },
        grid={"min": cfg.grid.min, "max": cfg.grid.max, "step": cfg.grid.step},
        master_seed=cfg.engine.master_seed,
        k=cfg.engine.k,
        n_runs=cfg.engine.n_runs,
        cfg_hash=config_hash(cfg),
    )
    print(
        f"population: {marginal.n_screened}/{len(cohort)} screened, "
        f"common I*={marginal.optimal_incentive:g} EUR, "
        f"expense {marginal.total_expense:.2f} EUR, "
        f"benefit {marginal.total_benefit:.2f} EUR"
    )
    print(f"wrote outputs under {Path(args.out)}")
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "single":
            return run_single(args)
        return run_population(args)
    except (ConfigError, InputError) as exc:
        print(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}),
            file=sys.stderr,
        )
        return 1
    except OSError as exc:
        print(json.dumps({"error": "OSError", "message": str(exc)}), file=sys.stderr)
        return 1


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
