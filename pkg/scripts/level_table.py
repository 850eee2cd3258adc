"""Print minimal quantization levels for the catalog pendulum plants.

Usage: python3 scripts/level_table.py [--h 0.03]
"""

import argparse

from zoomquant.cli import REFERENCE_SIZES
from zoomquant.config import ExperimentConfig
from zoomquant.experiment import level_table


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--h", type=float, default=0.03)
    args = ap.parse_args()
    for name in ("inverted_pendulum", "inverted_pendulum_2out"):
        cfg = ExperimentConfig(
            plant_name=name,
            h=args.h,
            K_source="lqr_continuous",
            lqr_Q=[100.0, 0.0, 300.0, 0.0],
            kalman_W_channel="input",
        )
        dp, rows = level_table(cfg)
        ref = REFERENCE_SIZES.get((name, args.h), {})
        print(f"{name}  (n={dp.n}, p={dp.p}, m={dp.m}, h={args.h})")
        for method, N, size, exponent in rows:
            print(f"  {method:<26} N={N:<4} size={size:<6} reference={ref.get(method, '-')}")


if __name__ == "__main__":
    main()
