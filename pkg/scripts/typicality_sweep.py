#!/usr/bin/env python3
"""Sweep the circle-model typicalities over the perception angle and export
the profile (density, prior weight, and all three typicalities) as CSV."""
import argparse
import math

import numpy as np

from qpercept.measures import PerceptionSpace, profile_from_density, profile_to_csv
from qpercept.toymodels import circle_density_array


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--theta", type=float, default=math.pi / 2, help="state polar angle")
    parser.add_argument("--points", type=int, default=721)
    parser.add_argument("--output", default="circle_profile.csv")
    args = parser.parse_args()

    phis = np.linspace(-math.pi, math.pi, args.points)
    space = PerceptionSpace.grid({"phi": phis})
    profile = profile_from_density(space, circle_density_array(args.theta, phis))
    profile_to_csv(profile, args.output)
    print(f"wrote {args.points} rows to {args.output} "
          f"(total measure {profile.total_measure:.6f})")


if __name__ == "__main__":
    main()
