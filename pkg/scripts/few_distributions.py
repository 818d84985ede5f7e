"""Few-distributions construction over seeded random pools: revenue ratio, distributions used, groups."""

import argparse
import csv
import math
import sys
import time

import numpy as np

from homog.constructions import eps_construct
from homog.selftest import random_pool


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pools", type=int, default=10)
    ap.add_argument("--size", type=int, default=3)
    ap.add_argument("--n", type=int, default=12)
    ap.add_argument("--eps", type=float, nargs="+", default=[0.05, 0.1])
    ap.add_argument("--tries", type=int, default=50)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["pool", "eps", "ratio", "target", "distinct", "cap", "groups", "big_groups", "flagged", "seconds"])
    for k in range(args.pools):
        pool = random_pool(np.random.default_rng([6, k]), args.size, args.n)
        for eps in args.eps:
            t0 = time.perf_counter()
            res = eps_construct(pool, eps, args.seed, args.tries)
            plan = res.grouping
            big = sum(plan.is_big(g) for g in range(plan.k))
            w.writerow([
                k, eps, repr(res.ratio), 1 - 8 * eps, res.distinct_distributions,
                math.ceil(1 / eps) * plan.k, plan.k, big, plan.flagged, round(time.perf_counter() - t0, 3),
            ])


if __name__ == "__main__":
    main()
