"""Recompute the frozen reference values used by the tests from rational closed forms."""

import sys
from fractions import Fraction
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

import exact_oracles as oracle  # noqa: E402


def main():
    eps = Fraction(1, 1000)
    v, k = max((oracle.intro_myerson(10 - k, k, eps), k) for k in range(11))
    print(f"INTRO_IDEAL_OPTIMAL = {float(v)!r}  # 1 x D1 + {k} x D2")
    v, k = max((oracle.intro_second_price(10 - k, k, eps), k) for k in range(11))
    print(f"INTRO_IDEAL_SECOND_PRICE = {float(v)!r}  # {10 - k} x D1 + {k} x D2")
    v, k = max((oracle.regular_myerson(3 - k, k, 10**4, 3), k) for k in range(4))
    print(f"REGULAR_IDEAL_OPTIMAL = {float(v)!r}  # {3 - k} x ER + {k} x C")


if __name__ == "__main__":
    main()
