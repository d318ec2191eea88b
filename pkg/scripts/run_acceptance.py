"""Run every acceptance suite and print one verdict line per criterion.

    python3 scripts/run_acceptance.py [--seed N] [--grid-scale F] [--only NAME ...]
"""
import argparse
import sys

from mellin_lab.suites import SUITES, SuiteConfig, run_suite


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--grid-scale", type=float, default=1.0)
    ap.add_argument("--only", nargs="*", choices=list(SUITES))
    args = ap.parse_args()
    cfg = SuiteConfig(seed=args.seed, grid_scale=args.grid_scale)
    ok = True
    for i, name in enumerate(SUITES, start=1):
        if args.only and name not in args.only:
            continue
        res = run_suite(name, cfg)
        print(f"criterion {i:>2}: {res.summary()}", flush=True)
        ok &= res.passed
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
