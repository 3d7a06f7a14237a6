"""Regenerate every experiment table from the shipped scenario files.

    python scripts/run_experiments.py [outdir]

Writes one CSV per experiment (default ``results/``); plot them with any tool.
"""

import sys
from pathlib import Path

from qkdwave.cli import main

ROOT = Path(__file__).resolve().parents[1]
SCEN = ROOT / "scenarios"

RUNS = [
    ("pattern", "patterns_m1", "patterns_raman_m1"),
    ("pattern", "patterns_m3", "patterns_raman_m3"),
    ("pattern", "adjacent_m3", "patterns_adjacent_m3"),
    ("sweep-re", "re_l45", "re_l45"),
    ("sweep-re", "re_l65", "re_l65"),
    ("nmax", "re_l45", "nmax_l45"),
    ("nmax", "re_l65", "nmax_l65"),
    ("nmax", "dual_fiber_l45", "nmax_dual_l45"),
    ("compare", "knee_l70", "compare_knee"),
    ("rate-curve", "rate_curve_l45", "rate_curve_l45"),
]


def run(outdir: Path) -> int:
    outdir.mkdir(parents=True, exist_ok=True)
    worst = 0
    for command, scenario, name in RUNS:
        target = outdir / f"{name}.csv"
        code = main([command, "--scenario", str(SCEN / f"{scenario}.json"), "--format", "csv", "--out", str(target)])
        print(f"{command:<11} {scenario:<16} -> {target}  (exit {code})")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(run(Path(sys.argv[1]) if len(sys.argv) > 1 else ROOT / "results"))
