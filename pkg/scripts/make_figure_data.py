#!/usr/bin/env python3
"""Write the CSV data behind the six variance figures into one directory.

Usage::

    python scripts/make_figure_data.py --out-dir figures [--r 8] [--workers 4]

Figures 1-3 sweep the Lorentzian label beta, figures 4-6 sweep sigma pbar / hbar
for the Poincare family; each file also carries the canonical reference
values 0.5 / 0.25 for the dashed lines.
"""

import argparse
import hashlib
import os
import sys
import time

from relcoh import cli


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="figures")
    ap.add_argument("--r", type=float, default=cli.FIGURE_R, help="sigma / lambda_c")
    ap.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    args = ap.parse_args(argv)

    os.makedirs(args.out_dir, exist_ok=True)
    for n in sorted(cli.FIGURES):
        spec = cli.SweepSpec.from_figure(n, args.r)
        t0 = time.perf_counter()
        text = cli.sweep_csv(spec, cli.run_sweep(spec, args.workers))
        path = os.path.join(args.out_dir, f"figure{n}.csv")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
        digest = hashlib.sha256(text.encode()).hexdigest()[:16]
        print(f"figure {n}: {spec.family:10s} {spec.quantities[0]:12s} {spec.points} rows "
              f"-> {path}  sha256:{digest}  ({time.perf_counter() - t0:.1f}s)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
