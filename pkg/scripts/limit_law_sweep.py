#!/usr/bin/env python3
"""Sweep the nodal-set fraction and compare finite-degree Kac-Rice ratios
against the predicted limit lambda/(pi sqrt 2) + (2 pi - lambda)/(pi sqrt 3).

Usage: python scripts/limit_law_sweep.py [n] [out.csv]

One row per box half-width a on a ladder across (0, pi); shows how the
whole family interpolates between 2/sqrt(3) and sqrt(2).
"""

import sys

import numpy as np

from trigzero import correlation_of, expected_zero_ratio, measure_from_density, predicted_limit
from trigzero.cli import write_csv


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 1024
    out = sys.argv[2] if len(sys.argv) > 2 else "limit_law_sweep.csv"
    rows = []
    for a in np.linspace(0.1, np.pi - 0.1, 13):
        m = measure_from_density("box", a=float(a))
        rho = correlation_of(m, n)
        prof = expected_zero_ratio(rho, n)
        pred = predicted_limit(m.density)
        rows.append((float(a), pred.nodal_measure, prof.ratio, pred.limit,
                     abs(prof.ratio - pred.limit)))
        print(f"a={a:.3f}  nodal={pred.nodal_measure:.4f}  ratio={prof.ratio:.6f}"
              f"  limit={pred.limit:.6f}  gap={abs(prof.ratio - pred.limit):.5f}")
    write_csv(out, ["a", "nodal_measure", "ratio", "predicted_limit", "gap"], rows)
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
