"""Command-line entry point: run one named experiment from a config file."""

from __future__ import annotations

import argparse
import sys

import yaml

from .experiments import DEFAULTS, EXPERIMENTS, ConfigError, parse_config, run_experiment, summary_line


def _defaults_epilog() -> str:
    lines = ["per-experiment defaults (override in the config file):"]
    for name in EXPERIMENTS:
        lines.append(f"  {name}: {yaml.safe_dump(DEFAULTS[name], default_flow_style=True).strip()}")
    lines.append(
        "meta defaults: family=uniform_location, dim=1, box [0,1]^dim, base_width=2.0,\n"
        "  label_fn=coordinate_sum, lipschitz_const=1.0, distance_scale=1.0"
    )
    lines.append("environment: DISTREG_THREADS caps trial-loop workers (default 1)")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="distreg",
        description="Run a distribution-regression experiment and write a CSV report.",
        epilog=_defaults_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("experiment", choices=EXPERIMENTS, help="experiment to run")
    parser.add_argument("--config", help="YAML config file; defaults apply when omitted")
    parser.add_argument("--seed", type=int, help="override the master seed")
    parser.add_argument("--out", help="override the CSV output path")
    parser.add_argument(
        "--assert",
        dest="assert_mode",
        action="store_true",
        help="exit nonzero when the experiment's acceptance check fails",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    text = ""
    if args.config:
        with open(args.config) as fh:
            text = fh.read()
    try:
        config = parse_config(text, experiment=args.experiment)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        config.seed = args.seed
    if args.out is not None:
        config.out_path = args.out
    report = run_experiment(config)
    print(summary_line(report))
    if args.assert_mode and not report.assert_ok:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
