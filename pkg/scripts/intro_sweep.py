"""Ideal optimal-auction revenue of the two-distribution pool as the rare value grows.

The exact ideal equals ``(1/(n e))(1 - (1-e)^(n-1)) + (1-e)^(n-1)`` with one
sure bidder, which tends to ``1 + (n-1)/n`` as ``e -> 0``; homogeneous
economies stay at 1.
"""

import argparse
import csv
import sys

from homog.instances import make_intro_instance
from homog.search import best_homogeneous, ideal_revenue


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[2, 5, 10, 50, 100])
    ap.add_argument("--eps", type=float, nargs="+", default=[1e-2, 1e-3, 1e-4, 1e-6])
    args = ap.parse_args()

    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["n", "eps", "ideal", "ideal_economy", "homogeneous", "ratio", "limit"])
    for n in args.n:
        for eps in args.eps:
            if eps >= 1 / n:
                continue
            pool = make_intro_instance(n, eps)
            ideal = ideal_revenue(pool, "optimal_auction")
            homog = best_homogeneous(pool, "optimal_auction")
            w.writerow([n, eps, repr(ideal.value), ideal.describe(), repr(homog.value), repr(homog.value / ideal.value), 1 + (n - 1) / n])


if __name__ == "__main__":
    main()
