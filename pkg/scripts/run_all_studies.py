#!/usr/bin/env python3
"""Run every batch study with the shipped configs and print a verdict table.

Usage: python scripts/run_all_studies.py [outdir]
"""

import sys
from pathlib import Path

from rarefan.cli import main as cli_main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

STUDIES = [
    ("cutoff-study", "cutoff_study.ini"),
    ("profile-study", "profile_study.ini"),
    ("gn-check", "gn_check.ini"),
    ("background", "background.ini"),
    ("eps-sweep", "eps_sweep.ini"),
    ("decay", "decay.ini"),
]


def main() -> int:
    outdir = sys.argv[1] if len(sys.argv) > 1 else "out"
    worst = 0
    for kind, ini in STUDIES:
        print(f"=== {kind} ({ini}) ===")
        code = cli_main([kind, "--config", str(CONFIGS / ini), "--out", outdir])
        worst = max(worst, code)
    print(f"\noverall: {'PASS' if worst == 0 else 'FAIL' if worst == 1 else 'CONFIG ERROR'}")
    return worst


if __name__ == "__main__":
    sys.exit(main())
