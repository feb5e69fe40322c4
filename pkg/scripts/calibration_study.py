#!/usr/bin/env python3
"""Calibration repeatability: link-length error vs orientation noise.

Sweeps the sensor-noise level and reports per-trial percentage errors in
the mean/std table format for each level.
"""
import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

import math  # noqa: E402

from imuteleop.calib import monte_carlo_study, study_table  # noqa: E402


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--truth", type=float, nargs=2, default=(0.28, 0.24), metavar=("LU", "LF"))
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument(
        "--noise-deg", type=float, nargs="+", default=[0.5, 1.0, 2.0, 4.0],
        help="RMS orientation noise levels to sweep",
    )
    args = ap.parse_args()

    for noise in args.noise_deg:
        study = monte_carlo_study(
            truth=tuple(args.truth),
            noise_rms_rad=math.radians(noise),
            trials=args.trials,
            seed=args.seed,
        )
        print(f"=== {noise:g} deg RMS orientation noise ===")
        print(study_table(study))
        print()
    return 0


if __name__ == "__main__":
    sys.exit(main())
