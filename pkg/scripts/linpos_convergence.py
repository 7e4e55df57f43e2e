#!/usr/bin/env python3
"""Convergence of the linear-positivity Monte Carlo fraction with sample
count, against the exact value 1/3 of the defining interval condition."""
import argparse
import csv
import math
import sys

from qpercept.toymodels import linear_positivity_fraction


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--max-exponent", type=int, default=6, help="largest 10^k sample count")
    parser.add_argument("--output", default=None, help="CSV path (default: stdout)")
    args = parser.parse_args()

    rows = []
    for k in range(2, args.max_exponent + 1):
        samples = 10**k
        mc = linear_positivity_fraction(samples, args.seed)
        sigma = math.sqrt((1 / 3) * (2 / 3) / samples)
        rows.append(
            {
                "samples": samples,
                "fraction": mc.fraction,
                "deviation_from_third": mc.fraction - 1 / 3,
                "binomial_sigma": sigma,
            }
        )

    out = open(args.output, "w", newline="") if args.output else sys.stdout
    writer = csv.DictWriter(out, fieldnames=list(rows[0].keys()))
    writer.writeheader()
    writer.writerows(rows)
    if args.output:
        out.close()
        print(f"wrote {len(rows)} rows to {args.output}")


if __name__ == "__main__":
    main()
