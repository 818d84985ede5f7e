"""Homogeneous versus ideal optimal-auction revenue on the equal-revenue pool, across n and h."""

import argparse
import csv
import sys

from homog.instances import certify_ratio, handcrafted_auction_revenue, make_regular_instance, regular_mixed_economy
from homog.revenue import myerson_optimal_revenue


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="+", default=[2, 3, 4, 5])
    ap.add_argument("--h", type=float, nargs="+", default=[1e2, 1e3, 1e4, 1e5])
    ap.add_argument("--grid", type=int, default=200)
    args = ap.parse_args()

    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["n", "h", "ratio", "limit", "mixed_revenue", "handcrafted", "target"])
    for n in args.n:
        for h in args.h:
            if h <= n:
                continue
            pool = make_regular_instance(n, h, args.grid)
            ratio = certify_ratio(pool, "optimal_auction")
            mixed = myerson_optimal_revenue(regular_mixed_economy(pool))
            w.writerow([n, h, repr(ratio), n / (2 * n - 1), repr(mixed), repr(handcrafted_auction_revenue(pool)), 2 * n - 1])


if __name__ == "__main__":
    main()
