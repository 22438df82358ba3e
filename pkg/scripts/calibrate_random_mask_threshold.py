"""Pre-registered threshold for the random-mask convergence check.

Runs the noiseless random-mask estimator at N = 4000 on 30 seeds that the
acceptance test does not use, and reports mean - 3 * std of the Pearson
correlation with the closed-form image. The printed threshold is frozen into
tests/test_acceptance.py.
"""
import argparse
import json
import math
import statistics

from homghost.grid import make_grid
from homghost.objects import builtin_object
from homghost.runner import random_mask_fidelity

# shared with tests/test_acceptance.py
OBJECT = "lambda"
THETA = math.pi / 4
PIPELINE = "no_bs"
CALIBRATION_SEEDS = range(1000, 1030)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--masks", type=int, default=4000)
    ap.add_argument("--workers", type=int, default=4)
    a = ap.parse_args()
    obj = builtin_object(OBJECT, make_grid(48, 48))
    corr = [random_mask_fidelity(obj, THETA, PIPELINE, a.masks, 0.5, s, a.workers) for s in CALIBRATION_SEEDS]
    mean, sd = statistics.fmean(corr), statistics.stdev(corr)
    print(json.dumps({"N": a.masks, "seeds": len(corr), "mean": mean, "std": sd, "threshold": mean - 3 * sd}, indent=2))


if __name__ == "__main__":
    main()
