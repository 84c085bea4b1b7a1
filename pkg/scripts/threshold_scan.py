#!/usr/bin/env python3
"""Scan the relative energy excess (E - E_classical) / E and locate thresholds.

Massive: excess at pbar = 0 as a function of r = sigma / lambda_c.
Massless: excess as a function of sbar = sigma pbar / hbar, also reported as
sigma / lambdabar = sbar / (2 pi).

    python scripts/threshold_scan.py --target 0.01 --csv scan.csv
"""

import argparse
import csv
import math
import sys

import numpy as np

from relcoh import canonical


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--target", type=float, default=0.01, help="relative excess threshold")
    ap.add_argument("--csv", help="also write the scanned curves here")
    ap.add_argument("--points", type=int, default=60)
    args = ap.parse_args(argv)

    r_star = canonical.threshold_scan(args.target, "massive")
    s_star = canonical.threshold_scan(args.target, "massless")
    print(f"massive : excess <= {args.target:g} for sigma/lambda_c >= {r_star:.3f}")
    print(f"massless: excess <= {args.target:g} for sigma pbar/hbar >= {s_star:.3f} "
          f"(sigma/lambdabar >= {s_star / (2 * math.pi):.4f})")

    if args.csv:
        xs = np.geomspace(0.1, 50.0, args.points)
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["scale", "excess_massive", "excess_massless"])
            for x in xs:
                w.writerow([f"{x:.12g}",
                            f"{canonical.relative_energy_excess(x, 'massive'):.12g}",
                            f"{canonical.relative_energy_excess(x, 'massless'):.12g}"])
        print(f"wrote {len(xs)} rows to {args.csv}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
