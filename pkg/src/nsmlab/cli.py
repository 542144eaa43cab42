"""Command-line interface: experiment subcommands plus the invariant checker.

Exit codes: 0 success, 1 configuration/verification failure, 2 usage error.
CSV goes to ``--out``; the resolved-configuration echo goes to stderr so the
CSV stays schema-pure.
"""

import argparse
import dataclasses
import sys

from .experiments import (
    ADVERSARIES,
    PROBLEMS,
    SCHEDULES,
    linreg_config,
    logistic_config,
    run_experiment,
    toy_config,
)
from .optimizers import METHODS, BaselineHyper
from .records import aggregate, write_csv
from .verify import run_all

__all__ = ["cli_main", "main"]


def _parse_seeds(text: str) -> tuple:
    """A bare integer is a seed count (0..n-1); a comma list is literal seeds."""
    if "," in text:
        return tuple(int(part) for part in text.split(","))
    count = int(text)
    if count < 1:
        raise ValueError("seed count must be >= 1")
    return tuple(range(count))


def _parse_optimizers(text: str) -> tuple:
    if text == "all":
        return METHODS
    return tuple(part.strip() for part in text.split(",") if part.strip())


def _add_experiment_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--p", type=float, default=None, help="corruption probability (presets may sweep or derive it)")
    sub.add_argument("--q", type=float, default=None, help="theorem-schedule q (default 3/4 of the threshold)")
    sub.add_argument("--T", type=int, default=None, dest="n_steps", help="iteration count")
    sub.add_argument("--seeds", type=str, default=None, help="seed count, or comma-separated seed list")
    sub.add_argument("--gamma0", type=float, default=None, help="step scale for inverse-t / const schedules")
    sub.add_argument("--schedule", choices=SCHEDULES, default=None)
    sub.add_argument("--adversary", choices=ADVERSARIES, default=None)
    sub.add_argument("--adversary-factor", type=float, default=None,
                     help="scale of the scaled-opposite / fixed adversaries")
    sub.add_argument("--optimizers", type=str, default=None, help="comma list from "
                     + ",".join(METHODS) + ", or 'all'")
    sub.add_argument("--out", type=str, default=None, help="output CSV path")
    sub.add_argument("--aggregate", choices=("none", "mean"), default="none")
    sub.add_argument("--d", type=int, default=None, help="problem dimension")
    sub.add_argument("--n-samples", type=int, default=None)
    sub.add_argument("--m", type=int, default=None, dest="n_classes", help="class count")
    sub.add_argument("--r", type=float, default=None, help="feasible-set radius / bound")
    sub.add_argument("--lam", type=float, default=None, help="L2 weight (logistic)")
    sub.add_argument("--separation", type=float, default=None, help="class-mean separation")
    sub.add_argument("--noise-sd", type=float, default=None, help="target noise (linreg; default r/4)")
    sub.add_argument("--x1", type=float, default=None, help="initial iterate, replicated scalar")
    sub.add_argument("--record-every", type=int, default=None, help="metric cadence override")
    sub.add_argument("--paper-scale", action="store_true", help="paper-sized preset instead of desk scale")
    sub.add_argument("--unprojected-baselines", action="store_true",
                     help="skip projecting the baseline methods (sensitivity mode)")
    sub.add_argument("--momentum", type=float, default=None)
    sub.add_argument("--beta1", type=float, default=None)
    sub.add_argument("--beta2", type=float, default=None)
    sub.add_argument("--eps", type=float, default=None)
    sub.add_argument("--rho", type=float, default=None)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nsmlab",
        description="Normalized subgradient method under randomly corrupted feedback: "
                    "seeded experiments and invariant checks.",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("toy", "diagonal quartic threshold experiment"),
        ("linreg", "constrained least squares with the worst-case adversary"),
        ("logistic", "unconstrained multiclass softmax with the scaled-opposite adversary"),
        ("custom", "fully explicit configuration (requires --problem)"),
    ):
        sub = subs.add_parser(name, help=helptext)
        if name == "custom":
            sub.add_argument("--problem", choices=PROBLEMS, required=True)
        _add_experiment_flags(sub)
    subs.add_parser("verify", help="run the invariant suites and report pass/fail per suite")
    return parser


def _config_from_args(args) -> object:
    problem = args.problem if args.command == "custom" else args.command
    overrides = {}
    if args.p is not None:
        overrides["p_values"] = (args.p,)
    for attr, key in (
        ("q", "q"), ("n_steps", "n_steps"), ("gamma0", "gamma0"),
        ("adversary", "adversary"), ("adversary_factor", "adversary_factor"),
        ("d", "d"), ("n_samples", "n_samples"), ("n_classes", "n_classes"),
        ("r", "r"), ("lam", "lam"), ("separation", "separation"),
        ("noise_sd", "noise_sd"), ("x1", "x1_value"), ("record_every", "record_every"),
    ):
        value = getattr(args, attr)
        if value is not None:
            overrides[key] = value
    if args.schedule is not None:
        overrides["schedule_kind"] = args.schedule
    if args.seeds is not None:
        overrides["seeds"] = _parse_seeds(args.seeds)
    if args.optimizers is not None:
        overrides["optimizers"] = _parse_optimizers(args.optimizers)
    if args.unprojected_baselines:
        overrides["project_baselines"] = False
    hyper_kwargs = {
        key: getattr(args, key)
        for key in ("momentum", "beta1", "beta2", "eps", "rho")
        if getattr(args, key) is not None
    }
    if hyper_kwargs:
        overrides["hyper"] = dataclasses.replace(BaselineHyper(), **hyper_kwargs)
    if problem == "toy":
        cfg = toy_config(**overrides)
    elif problem == "linreg":
        cfg = linreg_config(paper_scale=args.paper_scale, **overrides)
    else:
        cfg = logistic_config(paper_scale=args.paper_scale, **overrides)
    if args.command == "custom":
        cfg.experiment = "custom"
        cfg.problem_kind = problem
    return cfg


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "verify":
        results = run_all()
        for res in results:
            print(f"[{'PASS' if res.passed else 'FAIL'}] {res.name}: {res.detail}")
        failed = [r for r in results if not r.passed]
        print(f"{len(results) - len(failed)}/{len(results)} suites passed")
        return 0 if not failed else 1
    try:
        cfg = _config_from_args(args)
        records = run_experiment(cfg)
        if args.aggregate == "mean":
            records = aggregate(records, "mean")
        out = args.out if args.out is not None else f"{args.command}.csv"
        write_csv(records, out)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"[nsmlab] wrote {len(records)} rows to {out}", file=sys.stderr)
    return 0


def main() -> None:
    sys.exit(cli_main())
