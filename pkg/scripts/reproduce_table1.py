#!/usr/bin/env python3
"""Recompute the embedded UFA/UTA validation grid with both engines and print the comparison.

    python scripts/reproduce_table1.py                  # 1e6 sessions per cell, seed 1
    python scripts/reproduce_table1.py --sessions 0     # analytic cells only
"""
import argparse
import sys
import time

from laacoex.experiments import validate_reference


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--sessions", type=int, default=1_000_000, help="simulated arrivals per cell (0: skip)")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--workers", type=int, default=1, help="parallel processes for the grid")
    args = ap.parse_args(argv)

    t0 = time.perf_counter()
    report = validate_reference(sessions=args.sessions, seed=args.seed, workers=args.workers)
    print(report.format())
    if report.engine_errors:
        print("\nthis build's simulation vs analytic (relative error, %):")
        for scheme, metric, lam, err in report.engine_errors:
            print(f"  {scheme:<4} {metric:<5} lambda_l={lam:<6g} {err:8.3f}")
    print(f"\n{time.perf_counter() - t0:.1f} s")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
