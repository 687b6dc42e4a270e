#!/usr/bin/env python3
"""Husimi maps of the variational cat states in the three phases.

Emits position-slice contour data (one block per parity sector and
coupling) plus the hump count of each map.  Pass --grid-slice momentum
for the momentum slices.
"""

import sys
from pathlib import Path

from quditcat.cli import main

DEFAULTS = [
    "husimi",
    "--N", "20",
    "--lambda-values", "0.0,1.0,2.5",
    "--parity", "00,10,01,11",
    "--grid-points", "128",
    "--grid-half-range", "1.5",
    "--out", str(Path(__file__).resolve().parent / "husimi.csv"),
]

if __name__ == "__main__":
    sys.exit(main(DEFAULTS + sys.argv[1:]))
