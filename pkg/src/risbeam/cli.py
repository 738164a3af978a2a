"""Command-line interface: run experiments, validate configs, print the bound."""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .harness import ConfigError, aggregate, emit, load_config, run_experiment
from .metrics import ImpairmentParams, capacity_upper_bound


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    overrides = {}
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.seed is not None:
        overrides["base_seed"] = args.seed
    if args.out is not None:
        overrides["output_path"] = args.out
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    records = run_experiment(cfg)
    summary = aggregate(records, cfg.sweep_axis) if records else []
    paths = emit(summary, records, cfg)
    for row in summary:
        print(f"{cfg.sweep_axis}={row.sweep_value:g} {row.method:>11s}: "
              f"mean SE {row.mean_se:.4f} +/- {row.stderr_se:.4f} "
              f"({row.trials_ok} ok, {row.trials_failed} failed)")
    for kind, path in paths.items():
        print(f"{kind}: {path}")
    return 0


def _cmd_validate(args) -> int:
    load_config(args.config)
    print(f"{args.config}: OK")
    return 0


def _cmd_bound(args) -> int:
    imp = ImpairmentParams(rho_b=args.rho_b, rho_u=args.rho_u, sigma2=1.0)
    print(f"{capacity_upper_bound(args.antennas, imp):.6f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="risbeam",
        description="RIS passive beamforming experiments under hardware "
                    "impairments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a sweep described by a config file")
    p_run.add_argument("--config", required=True, help="YAML config path")
    p_run.add_argument("--trials", type=int, help="override trial count")
    p_run.add_argument("--seed", type=int, help="override base seed")
    p_run.add_argument("--out", help="override output path prefix")
    p_run.set_defaults(func=_cmd_run)

    p_val = sub.add_parser("validate", help="check a config file and exit")
    p_val.add_argument("--config", required=True, help="YAML config path")
    p_val.set_defaults(func=_cmd_validate)

    p_bound = sub.add_parser(
        "bound", help="print the distortion-imposed capacity ceiling")
    p_bound.add_argument("--antennas", "-M", type=int, required=True)
    p_bound.add_argument("--rho-b", type=float, required=True)
    p_bound.add_argument("--rho-u", type=float, required=True)
    p_bound.set_defaults(func=_cmd_bound)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
