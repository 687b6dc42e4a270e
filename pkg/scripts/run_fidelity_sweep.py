#!/usr/bin/env python3
"""Fidelity of the variational cats against the tracked eigenstates.

Sweeps a log grid of couplings, reporting the fidelity at the critical
point and the phase-space overlap maximum for each tracked parity sector.
"""

import sys
from pathlib import Path

from quditcat.cli import main

DEFAULTS = [
    "fidelity",
    "--N", "20",
    "--lambda-min", "0.01",
    "--lambda-max", "20.0",
    "--lambda-steps", "20",
    "--lambda-scale", "log",
    "--out", str(Path(__file__).resolve().parent / "fidelity.csv"),
]

if __name__ == "__main__":
    sys.exit(main(DEFAULTS + sys.argv[1:]))
