#!/usr/bin/env python3
"""Paired anisotropic/hydrostatic sweep over eps, written to an output directory.

    python scripts/run_convergence.py --out runs/convergence [--config my.cfg] [--workers N]

Without ``--config`` the reference parameters are used (64 x 129 grid,
dt = 5e-4, T = 1, eps = 0.2 ... 0.025); expect about half a minute per eps
on one core.
"""

import argparse
import json
import logging

from strip_hydro.config import REFERENCE_CONFIG, load_config, parse_config
from strip_hydro.harness import run_sweep, write_report


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", help="INI run configuration (default: reference parameters)")
    ap.add_argument("--out", default="runs/convergence")
    ap.add_argument("--workers", type=int, default=None)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    cfg = load_config(args.config) if args.config else parse_config(REFERENCE_CONFIG)
    report = run_sweep(cfg, workers=args.workers)
    summary = write_report(report, args.out)

    print(f"{'eps':>8} {'E_half':>12} {'E_dy':>12} {'E_3/2':>12} {'sup_dy_p':>12}")
    for row, pair in zip(report.rows, report.pairs):
        print(f"{row[0]:8.4f} {row[1]:12.4e} {row[2]:12.4e} {row[3]:12.4e} {pair.dy_pressure:12.4e}")
    print(json.dumps(summary, indent=2))


if __name__ == "__main__":
    main()
