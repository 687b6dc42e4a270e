#!/usr/bin/env python3
"""Energy-density spectrum of the lowest LMG eigenstates vs coupling.

Desk-scale defaults: D = 3, N = 20, six levels, 61 couplings across the
three phases.  Writes spectrum.csv next to this script unless --out is
given; any quditcat spectrum flag can be appended.
"""

import sys
from pathlib import Path

from quditcat.cli import main

DEFAULTS = [
    "spectrum",
    "--N", "20",
    "--lambda-min", "0.0",
    "--lambda-max", "3.0",
    "--lambda-steps", "61",
    "--levels", "6",
    "--out", str(Path(__file__).resolve().parent / "spectrum.csv"),
]

if __name__ == "__main__":
    sys.exit(main(DEFAULTS + sys.argv[1:]))
