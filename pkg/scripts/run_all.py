#!/usr/bin/env python3
"""Run every shipped experiment config and collect the CSV reports in results/.

Usage:
    python scripts/run_all.py [--seed N] [--assert]

Equivalent to calling `distreg <experiment> --config scripts/configs/<experiment>.yaml`
once per experiment.
"""

import argparse
import sys
from pathlib import Path

from distreg.experiments import parse_config, run_experiment, summary_line

CONFIG_DIR = Path(__file__).parent / "configs"


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, help="override every config's seed")
    parser.add_argument("--assert", dest="assert_mode", action="store_true")
    args = parser.parse_args()

    Path("results").mkdir(exist_ok=True)
    failures = 0
    for path in sorted(CONFIG_DIR.glob("*.yaml")):
        config = parse_config(path.read_text())
        if args.seed is not None:
            config.seed = args.seed
        report = run_experiment(config)
        print(summary_line(report))
        if args.assert_mode and not report.assert_ok:
            failures += 1
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
