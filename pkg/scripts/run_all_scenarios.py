#!/usr/bin/env python3
"""Run every bundled scenario and grade the results.

Usage: python scripts/run_all_scenarios.py [output_dir]

Writes one subdirectory per scenario under output_dir (default: runs/),
then prints the combined verdict table.  Exit status is nonzero if any
verdict fails or is incomplete.
"""

import sys

from trigzero.cli import compare_report, load_scenario, print_verdicts, run_scenario

SCENARIOS = [
    "independent",
    "box_quarter_pi",
    "box_half_pi",
    "box_three_quarter_pi",
    "annulus",
    "poisson_05",
    "poisson_09",
    "constant_corr_03",
    "raised_cosine_squared",
    "atomic_sqrt2",
]


def main():
    output_dir = sys.argv[1] if len(sys.argv) > 1 else "runs"
    worst = 0
    for name in SCENARIOS:
        cfg = load_scenario(name)
        manifest = run_scenario(cfg, output_dir=output_dir)
        verdicts, code = compare_report(manifest)
        print_verdicts(verdicts)
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
