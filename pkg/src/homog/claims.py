"""Scalar inequalities and lemma quantities behind the revenue guarantees.

Functions accept ``float`` or :class:`fractions.Fraction` arguments; with
fractions every comparison below is exact.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .dist import two_point
from .revenue import Economy, prob_second_highest_at_least


def tail_concavity_sides(x, n: int):
    """``(1 - (1-x)^n, (1 - (1-1/n)^n) * n * x)``; the first dominates on ``[0, 1/n]``."""
    one = Fraction(1) if isinstance(x, Fraction) else 1.0
    lhs = one - (one - x) ** n
    rhs = (one - (one - one / n) ** n) * n * x
    return lhs, rhs


def single_exceed_mass(x, n: int):
    """``x (1-x)^(n-1)``, non-increasing on ``[1/n, 1]``."""
    return x * (1 - x) ** (n - 1)


def product_vs_squares(x, y):
    """``(xy, (x^2 + y^2)/2)``."""
    return x * y, (x * x + y * y) / 2


def low_value_lemma_closed_form(eps: float, n: int) -> Fraction | float:
    """``Pr[max_(2) >= L]`` for ``ceil(eps n)`` i.i.d. bidders with ``Pr[X >= L] = min(1, 1/(eps^2 n))``."""
    k = math.ceil(eps * n - 1e-12)
    p = min(1.0, 1.0 / (eps * eps * n))
    return 1.0 - (1.0 - p) ** k - k * p * (1.0 - p) ** (k - 1)


def low_value_lemma_probability(eps: float, n: int) -> float:
    """Same quantity evaluated by the exact second-highest survival engine."""
    k = math.ceil(eps * n - 1e-12)
    p = min(1.0, 1.0 / (eps * eps * n))
    d = two_point(0.0, 1.0, p)
    return prob_second_highest_at_least(Economy.homogeneous(d, k), 1.0)


def h_bound(opt: float, eps: float) -> float:
    """Upper bound ``4 OPT / eps^3`` on the high threshold."""
    return 4.0 * opt / eps**3


def grid_size_bound(eps: float) -> float:
    return 4.0 / eps**4


def units_bound(eps: float) -> float:
    return 16.0 / eps**10
