#!/usr/bin/env python3
"""Run the reference-constant battery and print a fixed-width table."""
import argparse
import sys

from qpercept.reproduce import run_all


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--only", default=None)
    args = parser.parse_args()

    checks = run_all(seed=args.seed, only=args.only)
    width = max(len(c.name) for c in checks)
    failures = 0
    for c in checks:
        status = "ok  " if c.passed else "FAIL"
        print(f"{status} {c.name:<{width}} expected={c.expected:< .10g} "
              f"observed={c.observed:< .10g} tol={c.tolerance:.1e}")
        if c.note:
            print(f"     {' ' * width} note: {c.note}")
        failures += not c.passed
    print(f"\n{len(checks) - failures}/{len(checks)} checks passed")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
