"""
Command-line interface for the IRL lab.

Exit codes: 0 success, 1 verification found failures, 2 invalid input or
domain error.
"""

import argparse
import json
import logging
import sys
from typing import List, Optional

import numpy as np
from pydantic import ValidationError

from irl_core import CODE_KINDS, DEFAULT_GAMMA, DEFAULT_SEED, DEFAULT_TRIALS
from irl_core.exceptions import IrlLabError, TooLarge
from irl_core.utils import ConfigManager, format_number, load_config_file, setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_ERROR = 2


def _comma_list(text: str) -> List[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def _int_list(text: str) -> List[int]:
    return [int(item) for item in _comma_list(text)]


def _print_report(report):
    print(f"members          {report.size}")
    print(f"beta             {format_number(report.beta)}")
    print(f"min own margin   {format_number(report.min_own_margin)}")
    print(f"max cross margin {format_number(report.max_cross_margin)}")
    print(f"margin shortfalls {len(report.margin_shortfalls)}")
    print(f"cross failures   {len(report.cross_failures)}")
    print(f"norm failures    {len(report.norm_failures)}")
    print(f"status           {'PASSED' if report.passed else 'FAILED'}")


def cmd_ensemble(args) -> int:
    from irl_core.data_io import write_ensemble
    from irl_core.ensemble import build_ensemble, verify_ensemble
    from irl_core.schemas import EnsembleConfig

    cfg = EnsembleConfig.from_regime(
        args.n, args.beta, eps=args.eps, gamma=args.gamma,
        code_kind=args.code, regime=args.regime,
    )
    ensemble = build_ensemble(cfg)
    report = verify_ensemble(ensemble)
    write_ensemble(ensemble, report, args.out)
    print(f"eps              {format_number(cfg.eps, 6)}")
    print(f"theta            {format_number(cfg.theta, 6)}")
    _print_report(report)
    return EXIT_OK


def cmd_verify(args) -> int:
    from irl_core.data_io import read_ensemble
    from irl_core.ensemble import verify_ensemble

    _, ensemble = read_ensemble(args.input)
    report = verify_ensemble(ensemble)
    _print_report(report)
    if report.margin_shortfalls:
        print(f"shortfall members: {report.margin_shortfalls}")
    if report.cross_failures:
        print(f"cross failures: {report.cross_failures[:20]}")
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


def cmd_bounds(args) -> int:
    from irl_core.bounds import bound_report, format_bound_report

    report = bound_report(args.n, args.beta, eps=args.eps, m=args.m)
    if args.json:
        print(json.dumps(report.model_dump(), indent=2))
    else:
        print(format_bound_report(report))
    return EXIT_OK


def cmd_kl(args) -> int:
    from irl_core.bounds import kl_trajectory_bound
    from irl_core.data_io import read_ensemble
    from irl_core.exceptions import EpsTooLarge
    from irl_core.trajectory import brute_force_trajectory_kl, exact_trajectory_kl, extended_chain

    manifest, ensemble = read_ensemble(args.input)
    cfg = manifest.config
    try:
        bound = kl_trajectory_bound(cfg.n, cfg.eps, args.m)
    except EpsTooLarge as e:
        logger.warning(f"No KL bound: {e}")
        bound = float("inf")

    chains = [extended_chain(member.instance) for member in ensemble]
    size = chains[0].n
    init = np.full(size, 1.0 / size)

    header = f"{'i':>4} {'j':>4} {'exact':>14}"
    if args.brute:
        header += f" {'brute':>14}"
    header += f" {'bound':>14}  ok"
    print(header)

    violations = 0
    for i, P in enumerate(chains):
        for j, Q in enumerate(chains):
            if i == j:
                continue
            exact = exact_trajectory_kl(P, Q, init, args.m)
            line = f"{i:>4} {j:>4} {exact:>14.6g}"
            if args.brute:
                try:
                    line += f" {brute_force_trajectory_kl(P, Q, init, args.m):>14.6g}"
                except TooLarge:
                    line += f" {'n/a':>14}"
            ok = exact <= bound
            violations += not ok
            print(f"{line} {bound:>14.6g}  {'yes' if ok else 'NO'}")

    if violations:
        logger.warning(f"{violations} pairs exceed the trajectory KL bound")
    return EXIT_OK


def _experiment_config(args):
    from irl_core.schemas import ExperimentConfig

    manager = ConfigManager(load_config_file(args.config))
    manager.apply_overrides(args.set or [])
    if args.out_csv:
        manager.set("out_csv", args.out_csv)
    if args.out_plot:
        manager.set("out_plot", args.out_plot)
    if args.solvers:
        manager.set("solvers", _comma_list(args.solvers))
    if args.workers:
        manager.set("workers", args.workers)
    if args.upper_line:
        manager.set("upper_line", args.upper_line)
    if args.fresh_instance:
        manager.set("fresh_instance", True)
    return ExperimentConfig.model_validate(manager.to_dict())


def cmd_experiment(args) -> int:
    from irl_core.eval import summarize_rows
    from irl_core.harness import run_experiment

    cfg = _experiment_config(args)
    rows = run_experiment(cfg)
    print(summarize_rows(rows).to_string(index=False))
    return EXIT_OK


def cmd_plot(args) -> int:
    from irl_core.eval import success_below_threshold
    from irl_core.data_io import read_csv
    from irl_core.plots import emit_plot
    from irl_core.schemas import ExperimentConfig

    rows = read_csv(args.input)
    if not rows:
        raise ValueError(f"{args.input} has no rows")
    first = rows[0]
    cfg = ExperimentConfig(
        n=args.n or first.n,
        k=args.k or first.k,
        gamma=args.gamma or first.gamma,
        target_beta=args.beta or first.beta,
        upper_line=args.upper_line,
        solvers=sorted({row.solver for row in rows}),
    )
    threshold = emit_plot(rows, cfg, args.out)
    print(f"threshold m = {format_number(threshold, 6)}")
    if threshold is not None:
        below = success_below_threshold(rows, threshold)
        for solver in cfg.solvers:
            rates = [row.success_rate for row in below if row.solver == solver]
            mean = sum(rates) / len(rates) if rates else None
            print(f"{solver}: mean success at m <= threshold {format_number(mean)}")
    return EXIT_OK


def cmd_identify(args) -> int:
    from irl_core.harness import run_identification_experiment
    from irl_core.schemas import EnsembleConfig

    cfg = EnsembleConfig.from_regime(
        args.n, args.beta, eps=args.eps, gamma=args.gamma,
        code_kind=args.code, regime=args.regime,
    )
    table = run_identification_experiment(cfg, args.m, trials=args.trials, base_seed=args.seed)
    print(table.to_string(index=False))
    return EXIT_OK if table["consistent"].all() else EXIT_VERIFY_FAILED


def _add_ensemble_options(parser: argparse.ArgumentParser):
    parser.add_argument("--n", type=int, required=True, help="number of states")
    parser.add_argument("--beta", type=float, required=True, help="separability margin")
    parser.add_argument("--eps", type=float, default=None, help="row perturbation radius")
    parser.add_argument("--gamma", type=float, default=DEFAULT_GAMMA)
    parser.add_argument("--code", choices=CODE_KINDS, default="simplex")
    parser.add_argument("--regime", choices=["default", "simplex", "certified"], default="default",
                        help="how eps is chosen when --eps is absent")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irl-lab",
        description="Hard IRL ensembles, sample-complexity bounds and solver experiments",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ensemble", help="build, verify and write a hard ensemble")
    _add_ensemble_options(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("verify", help="re-verify an ensemble directory")
    p.add_argument("--in", dest="input", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bounds", help="evaluate every bound at one point")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("kl", help="exact trajectory KL vs bound for every ensemble pair")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--brute", action="store_true", help="also enumerate trajectories")
    p.set_defaults(func=cmd_kl)

    p = sub.add_parser("experiment", help="run the Monte Carlo solver experiment")
    p.add_argument("--config", required=True, help="JSON or YAML ExperimentConfig")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config field")
    p.add_argument("--out-csv", default=None)
    p.add_argument("--out-plot", default=None)
    p.add_argument("--solvers", default=None, help="comma separated solver names")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--upper-line", type=float, default=None)
    p.add_argument("--fresh-instance", action="store_true")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("plot", help="plot a results CSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--upper-line", type=float, default=None)
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("identify", help="ensemble-member identification error vs Fano bound")
    _add_ensemble_options(p)
    p.add_argument("--m", type=_int_list, required=True, help="comma separated trajectory lengths")
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_identify)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)

    try:
        return args.func(args)
    except (IrlLabError, ValidationError, ValueError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
