"""Exact and Monte Carlo revenue of economies of independent bidders.

Every exact quantity here is a finite sum over the merged support grid of
the bidders' distributions: survival functions of discrete random variables
are piecewise constant, so ``E[Y] = sum_k (v_k - v_{k-1}) * Pr[Y >= v_k]``
holds with no quadrature error.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .dist import ValueDistribution, mixture_support

MC_CHUNK = 1 << 15


@dataclass(frozen=True)
class Economy:
    bidders: tuple[ValueDistribution, ...]

    def __post_init__(self):
        if len(self.bidders) < 1:
            raise ValueError("economy needs at least one bidder")
        object.__setattr__(self, "bidders", tuple(self.bidders))

    @property
    def n(self) -> int:
        return len(self.bidders)

    @classmethod
    def homogeneous(cls, d: ValueDistribution, n: int) -> "Economy":
        return cls(tuple([d] * n))

    @classmethod
    def from_counts(cls, members: Sequence[ValueDistribution], counts: Sequence[int]) -> "Economy":
        out: list[ValueDistribution] = []
        for d, c in zip(members, counts, strict=True):
            out.extend([d] * int(c))
        return cls(tuple(out))

    def __add__(self, other: "Economy") -> "Economy":
        return Economy(self.bidders + other.bidders)

    def profile_count(self) -> int:
        return math.prod(len(d) for d in self.bidders)


@dataclass(frozen=True)
class RevenueReport:
    total: float
    low: float
    mid: float
    high: float
    mode: str = "exact"
    ci_halfwidth: float = 0.0
    samples: int = 0

    FIELDS = ("total", "low", "mid", "high", "mode", "ci_halfwidth", "samples")

    def as_row(self) -> dict:
        d = asdict(self)
        return {k: d[k] for k in self.FIELDS}


@dataclass(frozen=True)
class PairContribution:
    i: int
    j: int
    value: float


def _as_economy(e) -> Economy:
    if isinstance(e, Economy):
        return e
    return Economy(tuple(e))


def _below_matrix(dists: Sequence[ValueDistribution], grid: np.ndarray) -> np.ndarray:
    """``F[i, k] = Pr[X_i < grid[k]]``."""
    F = np.empty((len(dists), grid.size))
    for i, d in enumerate(dists):
        cum = np.concatenate([[0.0], np.cumsum(d.probs_array)])
        idx = np.searchsorted(d.values_array, grid, side="left")
        F[i] = np.minimum(cum[idx], 1.0)
    return F


def _exceed_counts(F: np.ndarray, upto: int = 2) -> list[np.ndarray]:
    """Probabilities that exactly 0, 1, ..., ``upto-1`` and ``>= upto`` bidders reach each grid value.

    Built by a sweep over bidders with only non-negative updates, which keeps
    tiny tail probabilities accurate.
    """
    K = F.shape[1]
    a = [np.ones(K)] + [np.zeros(K) for _ in range(upto)]
    for f in F:
        g = 1.0 - f
        a[upto] = a[upto] + a[upto - 1] * g
        for c in range(upto - 1, 0, -1):
            a[c] = a[c] * f + a[c - 1] * g
        a[0] = a[0] * f
    return a


def second_highest_survival(e: Economy) -> tuple[np.ndarray, np.ndarray]:
    """Grid ``v`` and ``Pr[max_(2) >= v]`` on it (0 for a lone bidder)."""
    e = _as_economy(e)
    grid = mixture_support(e.bidders)
    if e.n < 2:
        return grid, np.zeros(grid.size)
    F = _below_matrix(e.bidders, grid)
    return grid, np.clip(_exceed_counts(F, 2)[2], 0.0, 1.0)


def _pmf_from_survival(S: np.ndarray) -> np.ndarray:
    pmf = S - np.append(S[1:], 0.0)
    return np.maximum(pmf, 0.0)


def second_highest_pmf(e: Economy) -> tuple[np.ndarray, np.ndarray]:
    grid, S = second_highest_survival(e)
    return grid, _pmf_from_survival(S)


def prob_second_highest_at_least(e: Economy, t: float) -> float:
    """``Pr[max_(2) >= t]`` via the at-most-one-exceeds complement."""
    e = _as_economy(e)
    F = _below_matrix(e.bidders, np.array([float(t)]))
    return float(_exceed_counts(F, 2)[2][0])


def exact_second_price_revenue(e, L: float = 0.0, H: float = math.inf) -> RevenueReport:
    """Expected second-highest value, split by the band the second-highest value lands in.

    Bands are ``[0, L)``, ``[L, H)`` and ``[H, inf)``.
    """
    e = _as_economy(e)
    if e.n < 2:
        raise ValueError("second price revenue needs at least two bidders")
    grid, pmf = second_highest_pmf(e)
    contrib = grid * pmf
    low = math.fsum(contrib[grid < L])
    mid = math.fsum(contrib[(grid >= L) & (grid < H)])
    high = math.fsum(contrib[grid >= H])
    return RevenueReport(total=low + mid + high, low=low, mid=mid, high=high)


def sp(e) -> float:
    """Shorthand for the total expected second-highest value."""
    return exact_second_price_revenue(e).total


def exact_welfare(e) -> float:
    """``E[max_i X_i]``."""
    e = _as_economy(e)
    grid = mixture_support(e.bidders)
    F = _below_matrix(e.bidders, grid)
    S = _exceed_counts(F, 1)[1]
    gaps = np.diff(np.concatenate([[0.0], grid]))
    return math.fsum(gaps * S)


def second_price_with_reserve_revenue(e, reserve: float) -> float:
    """Sell to the highest bidder at ``max(reserve, second-highest)`` when the top value clears ``reserve``.

    With a single bidder this is a posted price.
    """
    e = _as_economy(e)
    r = float(reserve)
    F = _below_matrix(e.bidders, np.array([r]))
    counts = _exceed_counts(F, 2)
    # top clears but the second does not: pay the reserve
    rev = r * float(counts[1][0])
    if e.n >= 2:
        grid, pmf = second_highest_pmf(e)
        mask = grid >= r
        rev += math.fsum(grid[mask] * pmf[mask])
    return rev


def expected_min_of_group_maxima(e1: Sequence[ValueDistribution], e2: Sequence[ValueDistribution]) -> float:
    """``E[min(max of group 1, max of group 2)]`` for independent groups."""
    e1, e2 = list(e1), list(e2)
    if not e1 or not e2:
        raise ValueError("both groups must be nonempty")
    grid = mixture_support(e1 + e2)
    S1 = _exceed_counts(_below_matrix(e1, grid), 1)[1]
    S2 = _exceed_counts(_below_matrix(e2, grid), 1)[1]
    gaps = np.diff(np.concatenate([[0.0], grid]))
    return math.fsum(gaps * S1 * S2)


def squared_max_survival_integral(group: Sequence[ValueDistribution]) -> float:
    """``integral of Pr[max >= t]^2 dt`` over ``t >= 0``."""
    group = list(group)
    grid = mixture_support(group)
    S = _exceed_counts(_below_matrix(group, grid), 1)[1]
    gaps = np.diff(np.concatenate([[0.0], grid]))
    return math.fsum(gaps * S * S)


def pair_contribution(e, i: int, j: int) -> PairContribution:
    """``E[max_(2) * 1{bidders i, j hold the two highest values}]``.

    Ties go to lower indices: the top slot belongs to the lowest index among
    the highest values, the second slot to the lowest index among the
    highest remaining values. The events then partition the profile space.
    """
    e = _as_economy(e)
    if i == j:
        raise ValueError("pair needs two distinct bidders")
    if i > j:
        i, j = j, i
    if not (0 <= i and j < e.n):
        raise IndexError("bidder index out of range")
    others = [c for c in range(e.n) if c not in (i, j)]
    total = 0.0
    for top, sec in ((i, j), (j, i)):
        dt, ds = e.bidders[top], e.bidders[sec]
        for w, pw in zip(ds.support, ds.probs):
            if w == 0.0:
                continue
            above = math.fsum(p for u, p in zip(dt.support, dt.probs) if u > w)
            tied = math.fsum(p for u, p in zip(dt.support, dt.probs) if u == w) if top < sec else 0.0
            if above == 0.0 and tied == 0.0:
                continue
            # others must sit below w; a tie at w is allowed when c loses every tie-break it enters
            rest_above, rest_tied = 1.0, 1.0
            for c in others:
                dc = e.bidders[c]
                below = math.fsum(p for x, p in zip(dc.support, dc.probs) if x < w)
                at = math.fsum(p for x, p in zip(dc.support, dc.probs) if x == w)
                rest_above *= below + (at if c > sec else 0.0)
                rest_tied *= below + (at if c > sec and c > top else 0.0)
            total += w * pw * (above * rest_above + tied * rest_tied)
    return PairContribution(i, j, total)


def all_pair_contributions(e) -> list[PairContribution]:
    e = _as_economy(e)
    return [pair_contribution(e, i, j) for i in range(e.n) for j in range(i + 1, e.n)]


# -- Myerson ------------------------------------------------------------------


@dataclass(frozen=True)
class IronedBidder:
    """Ironed virtual value per support atom of one distribution (ascending support)."""

    values: np.ndarray
    probs: np.ndarray
    phi: np.ndarray


def _upper_hull(qs: np.ndarray, rs: np.ndarray) -> list[int]:
    hull: list[int] = []
    for k in range(qs.size):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            # drop b if it lies on or below the chord a -> k
            cross = (qs[b] - qs[a]) * (rs[k] - rs[a]) - (rs[b] - rs[a]) * (qs[k] - qs[a])
            if cross >= 0:
                hull.pop()
            else:
                break
        hull.append(k)
    return hull


@lru_cache(maxsize=4096)
def ironed_virtual_values(d: ValueDistribution) -> IronedBidder:
    """Slopes of the concave hull of the quantile-space revenue curve ``R(q) = q * v(q)``.

    Quantile ``q`` is the sale probability ``Pr[X >= v]``. Atom ``k`` owns the
    quantile interval ``(Pr[X > v_k], Pr[X >= v_k]]`` and its ironed virtual
    value is the hull slope over that interval.
    """
    v = d.values_array
    p = d.probs_array
    K = v.size
    # quantile points from q=0 upward: index 0 is (0, 0), index t is the t-th highest atom
    desc_p = p[::-1]
    q = np.concatenate([[0.0], np.cumsum(desc_p)])
    q[-1] = 1.0
    vals_desc = v[::-1]
    R = np.concatenate([[0.0], vals_desc * q[1:]])
    hull = _upper_hull(q, R)
    phi_desc = np.empty(K)
    for a, b in zip(hull, hull[1:]):
        mass = math.fsum(desc_p[a:b])
        slope = (R[b] - R[a]) / mass
        phi_desc[a:b] = slope
    return IronedBidder(values=v, probs=p, phi=phi_desc[::-1].copy())


def _level_distribution(d: ValueDistribution) -> tuple[np.ndarray, np.ndarray]:
    ib = ironed_virtual_values(d)
    levels, inv = np.unique(ib.phi, return_inverse=True)
    masses = np.bincount(inv, weights=ib.probs, minlength=levels.size)
    return levels, masses


def myerson_optimal_revenue(e) -> float:
    """Optimal auction revenue ``E[max(0, max_i phibar_i(X_i))]``."""
    e = _as_economy(e)
    levels_per = [_level_distribution(d) for d in e.bidders]
    pos = np.unique(np.concatenate([lv[lv > 0] for lv, _ in levels_per]))
    if pos.size == 0:
        return 0.0
    none_reach = np.ones(pos.size)
    for levels, masses in levels_per:
        cum = np.concatenate([[0.0], np.cumsum(masses)])
        idx = np.searchsorted(levels, pos, side="left")
        none_reach *= np.minimum(cum[idx], 1.0)
    gaps = np.diff(np.concatenate([[0.0], pos]))
    return math.fsum(gaps * (1.0 - none_reach))


@dataclass(frozen=True)
class InterimOutcome:
    """Interim allocation and threshold payment for each atom of one bidder."""

    values: np.ndarray
    probs: np.ndarray
    allocation: np.ndarray
    payment: np.ndarray

    @property
    def revenue(self) -> float:
        return math.fsum(self.probs * self.payment)

    def revenue_where(self, mask: np.ndarray) -> float:
        return math.fsum((self.probs * self.payment)[mask])


def myerson_interim(e) -> list[InterimOutcome]:
    """Per-bidder interim view of the deterministic Myerson auction.

    The item goes to the highest positive ironed virtual value, ties to the
    lowest index; each winner pays the smallest own value that still wins.
    Summed over bidders the expected payments equal
    :func:`myerson_optimal_revenue`.
    """
    e = _as_economy(e)
    levels_per = [_level_distribution(d) for d in e.bidders]
    out = []
    for i, d in enumerate(e.bidders):
        ib = ironed_virtual_values(d)
        alloc = np.zeros(ib.phi.size)
        for k, phi in enumerate(ib.phi):
            if phi <= 0:
                continue
            prob = 1.0
            for j, (levels, masses) in enumerate(levels_per):
                if j == i:
                    continue
                if j < i:
                    prob *= math.fsum(masses[levels < phi])
                else:
                    prob *= math.fsum(masses[levels <= phi])
            alloc[k] = prob
        steps = np.diff(np.concatenate([[0.0], alloc]))
        payment = np.cumsum(ib.values * steps)
        out.append(InterimOutcome(ib.values, ib.probs, alloc, payment))
    return out


def optimal_posted_price(d: ValueDistribution, positive: bool = True) -> tuple[float, float]:
    """Best take-it-or-leave-it price and its acceptance probability.

    Ties go to the lowest price. With ``positive`` the price 0 is skipped
    whenever any positive value exists.
    """
    best_p, best_q, best_rev = 0.0, 1.0, -1.0
    tail = 1.0
    for v, p in zip(d.support, d.probs):
        q = tail
        tail -= p
        if positive and v == 0.0 and d.max_value > 0:
            continue
        if v * q > best_rev + 1e-15:
            best_p, best_q, best_rev = v, q, v * q
    return best_p, max(best_q, 0.0)


# -- Monte Carlo ----------------------------------------------------------------


def _chunk_stats(e: Economy, seed: int, chunk: int, size: int, L: float, H: float) -> np.ndarray:
    draws = np.empty((e.n, size))
    for i, d in enumerate(e.bidders):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, i, chunk])))
        u = rng.random(size)
        cum = np.cumsum(d.probs_array)
        cum[-1] = 1.0
        draws[i] = d.values_array[np.searchsorted(cum, u, side="right").clip(max=len(d) - 1)]
    y = np.sort(draws, axis=0)[-2]
    mean = y.mean()
    m2 = float(np.sum((y - mean) ** 2))
    return np.array(
        [size, mean, m2, y[y < L].sum(), y[(y >= L) & (y < H)].sum(), y[y >= H].sum()]
    )


def monte_carlo_revenue(
    e, samples: int, seed: int, L: float = 0.0, H: float = math.inf, workers: int = 1
) -> RevenueReport:
    """Sample-mean estimate of the second-price revenue.

    Draws are keyed by (seed, bidder, chunk of ``MC_CHUNK`` samples), and
    chunk statistics are merged in chunk order, so the estimate is identical
    for any ``workers``.
    """
    e = _as_economy(e)
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if e.n < 2:
        raise ValueError("second price revenue needs at least two bidders")
    sizes = [min(MC_CHUNK, samples - s) for s in range(0, samples, MC_CHUNK)]
    jobs = [(e, seed, c, size, L, H) for c, size in enumerate(sizes)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            stats = list(ex.map(lambda a: _chunk_stats(*a), jobs))
    else:
        stats = [_chunk_stats(*a) for a in jobs]
    n_tot, mean, m2 = 0.0, 0.0, 0.0
    bands = np.zeros(3)
    for s in stats:
        nb, mb, m2b = s[0], s[1], s[2]
        delta = mb - mean
        tot = n_tot + nb
        mean = mean + delta * nb / tot
        m2 = m2 + m2b + delta * delta * n_tot * nb / tot
        n_tot = tot
        bands += s[3:]
    low, mid, high = (bands / samples).tolist()
    std = math.sqrt(m2 / (samples - 1)) if samples > 1 else 0.0
    return RevenueReport(
        total=low + mid + high,
        low=low,
        mid=mid,
        high=high,
        mode="monte_carlo",
        ci_halfwidth=1.96 * std / math.sqrt(samples),
        samples=samples,
    )
