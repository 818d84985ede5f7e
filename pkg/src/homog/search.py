"""Thresholds and exhaustive search over economies built from a distribution pool."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dist import ValueDistribution, quantile_inf
from .revenue import Economy, myerson_optimal_revenue, sp

DEFAULT_LIMIT = 200_000
OBJECTIVES = ("optimal_auction", "second_price")


class BudgetExceeded(RuntimeError):
    def __init__(self, count: int, limit: int):
        super().__init__(f"{count} multisets exceed the search limit of {limit}")
        self.count = count
        self.limit = limit


@dataclass(frozen=True)
class DistributionPool:
    members: tuple[ValueDistribution, ...]
    n: int

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise ValueError("pool needs at least one distribution")
        if self.n < 2:
            raise ValueError("pool bidder count must be >= 2")

    @property
    def labels(self) -> list[str]:
        return [d.label or f"D{k + 1}" for k, d in enumerate(self.members)]

    def economy(self, counts: Sequence[int]) -> Economy:
        return Economy.from_counts(self.members, counts)

    def scaled(self, c: float) -> "DistributionPool":
        return DistributionPool(tuple(d.scaled(c) for d in self.members), self.n)


@dataclass(frozen=True)
class Thresholds:
    H: float
    L: float | None
    regime: str
    levels: tuple[float, ...]
    argmax_H: int
    argmax_L: int | None = None


@dataclass
class IdealResult:
    counts: tuple[int, ...]
    value: float
    objective: str
    economies_scanned: int
    labels: list[str] = field(default_factory=list)
    heuristic: bool = False

    def economy(self, pool: DistributionPool) -> Economy:
        return pool.economy(self.counts)

    def multiset(self) -> list[tuple[str, int]]:
        return [(lab, c) for lab, c in zip(self.labels, self.counts) if c]

    def describe(self) -> str:
        return " ".join(f"{lab}×{c}" for lab, c in self.multiset())


def _level_threshold(dists: Sequence[ValueDistribution], level: float) -> tuple[float, int]:
    """``max_i inf{T : F_i(T) >= level}``, with levels <= 0 mapped to 0; ties to lowest index."""
    if level <= 0:
        return 0.0, 0
    best, arg = -1.0, 0
    for k, d in enumerate(dists):
        q = quantile_inf(d, level)
        if q > best:
            best, arg = q, k
    return best, arg


def compute_thresholds(source, regime: str, eps: float | None = None) -> Thresholds:
    """Pool-wide quantile thresholds.

    ``source`` is a :class:`DistributionPool` or an :class:`Economy`; the
    bidder count ``n`` comes from it. ``regime`` is ``opt_n`` (level
    ``1 - 1/n``), ``sp_n_minus_1`` (``1 - 1/(n-1)``) or ``eps`` (``L`` at
    ``1 - 1/(eps^2 n)``, ``H`` at ``1 - eps/n``).
    """
    if isinstance(source, DistributionPool):
        dists, n = source.members, source.n
    elif isinstance(source, Economy):
        dists, n = source.bidders, source.n
    else:
        raise TypeError("source must be a DistributionPool or Economy")
    if regime == "opt_n":
        level = 1.0 - 1.0 / n
        H, arg = _level_threshold(dists, level)
        return Thresholds(H, None, regime, (level,), arg)
    if regime == "sp_n_minus_1":
        if n < 3:
            raise ValueError("sp_n_minus_1 thresholds need n >= 3")
        level = 1.0 - 1.0 / (n - 1)
        H, arg = _level_threshold(dists, level)
        return Thresholds(H, None, regime, (level,), arg)
    if regime == "eps":
        if eps is None or not 0 < eps < 1:
            raise ValueError("eps regime needs 0 < eps < 1")
        lo_level = 1.0 - 1.0 / (eps * eps * n)
        hi_level = 1.0 - eps / n
        L, argL = _level_threshold(dists, lo_level)
        H, argH = _level_threshold(dists, hi_level)
        return Thresholds(H, L, regime, (lo_level, hi_level), argH, argL)
    raise ValueError(f"unknown regime {regime!r}")


def objective_function(objective: str) -> Callable[[Economy], float]:
    if objective == "optimal_auction":
        return myerson_optimal_revenue
    if objective == "second_price":
        return sp
    raise ValueError(f"unknown objective {objective!r}")


def multiset_count(n: int, m: int) -> int:
    return math.comb(n + m - 1, m - 1)


def _counts_from_combo(combo: tuple[int, ...], m: int) -> tuple[int, ...]:
    counts = [0] * m
    for k in combo:
        counts[k] += 1
    return tuple(counts)


def ideal_revenue(pool: DistributionPool, objective: str, limit: int = DEFAULT_LIMIT) -> IdealResult:
    """Best economy of exactly ``pool.n`` bidders over every multiset of pool members.

    Candidates are scanned in lexicographic multiset order and only a strict
    improvement replaces the incumbent, so ties resolve to the first multiset.
    """
    m = len(pool.members)
    count = multiset_count(pool.n, m)
    if count > limit:
        raise BudgetExceeded(count, limit)
    f = objective_function(objective)
    best_val, best_counts = -math.inf, None
    for combo in itertools.combinations_with_replacement(range(m), pool.n):
        counts = _counts_from_combo(combo, m)
        val = f(pool.economy(counts))
        if val > best_val:
            best_val, best_counts = val, counts
    return IdealResult(best_counts, best_val, objective, count, pool.labels)


def best_homogeneous(pool: DistributionPool, objective: str) -> IdealResult:
    m = len(pool.members)
    f = objective_function(objective)
    best_val, best_k = -math.inf, 0
    for k, d in enumerate(pool.members):
        val = f(Economy.homogeneous(d, pool.n))
        if val > best_val:
            best_val, best_k = val, k
    counts = tuple(pool.n if k == best_k else 0 for k in range(m))
    return IdealResult(counts, best_val, objective, m, pool.labels)


def hill_climb(
    pool: DistributionPool, objective: str, restarts: int = 5, seed: int = 0, max_steps: int = 10_000
) -> IdealResult:
    """Heuristic local search: move one bidder to another pool member while revenue improves.

    Offers no optimality guarantee; intended for pools too large for
    :func:`ideal_revenue`.
    """
    m = len(pool.members)
    f = objective_function(objective)
    rng = np.random.default_rng(seed)
    best_val, best_counts, scanned = -math.inf, None, 0
    for _ in range(restarts):
        counts = list(np.bincount(rng.integers(0, m, size=pool.n), minlength=m))
        val = f(pool.economy(counts))
        scanned += 1
        for _ in range(max_steps):
            improved = False
            for src in range(m):
                if counts[src] == 0:
                    continue
                for dst in range(m):
                    if dst == src:
                        continue
                    cand = counts.copy()
                    cand[src] -= 1
                    cand[dst] += 1
                    cv = f(pool.economy(cand))
                    scanned += 1
                    if cv > val + 1e-15:
                        counts, val, improved = cand, cv, True
                        break
                if improved:
                    break
            if not improved:
                break
        if val > best_val:
            best_val, best_counts = val, tuple(int(c) for c in counts)
    return IdealResult(best_counts, best_val, objective, scanned, pool.labels, heuristic=True)
