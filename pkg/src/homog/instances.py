"""Pools on which homogeneous economies lose about half of the ideal revenue."""

from __future__ import annotations

from .dist import constant, equal_revenue, two_point
from .revenue import Economy
from .search import DEFAULT_LIMIT, DistributionPool, best_homogeneous, ideal_revenue


def make_intro_instance(n: int, eps: float) -> DistributionPool:
    """A sure value of 1 versus ``1/(n eps)`` with probability ``eps``."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if not 0 < eps < 1 / n:
        raise ValueError("eps must lie in (0, 1/n)")
    d1 = constant(1.0, "D1")
    d2 = two_point(0.0, 1.0 / (n * eps), eps, "D2")
    return DistributionPool((d1, d2), n)


def make_regular_instance(n: int, h: float, grid: int = 200) -> DistributionPool:
    """Discretized equal-revenue distribution on ``[1, h]`` plus the constant ``n``."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if h <= n:
        raise ValueError("h must exceed n")
    if grid < 10:
        raise ValueError("grid must be >= 10")
    return DistributionPool((equal_revenue(h, grid, "ER"), constant(float(n), "C")), n)


def regular_mixed_economy(pool: DistributionPool) -> Economy:
    """One constant bidder and ``n - 1`` equal-revenue bidders."""
    er, c = pool.members
    return Economy((c,) + (er,) * (pool.n - 1))


def handcrafted_auction_revenue(pool: DistributionPool) -> float:
    """Revenue of: sell at ``h`` to a unique ``h``-bidder, withhold on several, else post ``n`` to the constant bidder."""
    er, c = pool.members
    n = pool.n
    h = er.max_value
    q = er.probs[-1]
    none_high = (1 - q) ** (n - 1)
    exactly_one = (n - 1) * q * (1 - q) ** (n - 2)
    return c.max_value * none_high + h * exactly_one


def certify_ratio(pool: DistributionPool, objective: str, limit: int = DEFAULT_LIMIT) -> float:
    """Best homogeneous revenue divided by the ideal revenue."""
    ideal = ideal_revenue(pool, objective, limit)
    if ideal.value <= 0:
        return 1.0
    return best_homogeneous(pool, objective).value / ideal.value
