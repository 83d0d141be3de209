#!/usr/bin/env python3
"""Trace the non-convergent zero-count ratio of the purely atomic measure.

Usage: python scripts/atomic_oscillation.py [alpha] [out.csv]

For rho(k) = cos(k alpha) with alpha irrational the normalized expected
zero count oscillates inside [sqrt(2), 2] forever; this script records a
dense degree ladder so the oscillation is visible in the output CSV.
"""

import math
import sys

from trigzero import atomic_measure, correlation_of, expected_zero_ratio
from trigzero.cli import write_csv


def main():
    alpha = float(sys.argv[1]) if len(sys.argv) > 1 else math.sqrt(2.0)
    out = sys.argv[2] if len(sys.argv) > 2 else "atomic_oscillation.csv"
    degrees = [2**k for k in range(5, 13)]
    degrees += [3 * 2**k for k in range(4, 11)]
    rho = correlation_of(atomic_measure(alpha), max(degrees))
    rows = []
    for n in sorted(degrees):
        prof = expected_zero_ratio(rho, n)
        rows.append((n, prof.ratio, prof.quadrature_error_estimate))
        print(f"n={n:5d}  ratio={prof.ratio:.6f}  err={prof.quadrature_error_estimate:.2e}")
    write_csv(out, ["n", "ratio", "error_estimate"], rows)
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
