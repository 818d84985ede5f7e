"""Constructive procedures: homogeneous economies with revenue guarantees and the few-distributions economy."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dist import (
    ValueDistribution,
    _round_middle,
    middle_grid,
    prob_units,
    truncate_below,
)
from .revenue import (
    Economy,
    all_pair_contributions,
    expected_min_of_group_maxima,
    myerson_interim,
    optimal_posted_price,
    second_price_with_reserve_revenue,
    sp,
)
from .search import DEFAULT_LIMIT, DistributionPool, compute_thresholds, ideal_revenue

HOMOG_OPT_FACTOR = 0.5 * (1.0 - 1.0 / math.e)
SP_ALPHA = 1.0 / (2.0 * math.e - 3.0)
HOMOG_SP_FACTOR = (1.0 - 2.0 / math.e) * SP_ALPHA
THRESHOLD_MASS_FLAG = 0.01


def _pool_index(pool: DistributionPool, d: ValueDistribution) -> int:
    for k, m in enumerate(pool.members):
        if m is d:
            return k
    for k, m in enumerate(pool.members):
        if m == d:
            return k
    raise KeyError("distribution is not a pool member")


# -- homogeneous, optimal auction ------------------------------------------------


@dataclass
class ReservePlan:
    """Run a second-price auction with ``reserve`` among ``n`` copies of ``distribution``."""

    distribution: ValueDistribution
    reserve: float
    case: str  # low_dominant | high_dominant
    pool_index: int
    provenance: dict = field(default_factory=dict)


def theorem1_construct(pool: DistributionPool, limit: int = DEFAULT_LIMIT) -> tuple[ReservePlan, float]:
    """Homogeneous reserve-price auction earning at least ``(1 - 1/e)/2`` of the ideal revenue.

    Splits the optimal economy's revenue at ``H``, the largest
    ``(1 - 1/n)``-quantile. If winners with value ``<= H`` bring in at least
    half, ``n`` copies of the distribution attaining ``H`` with reserve ``H``
    suffice. Otherwise the bidder earning most in the optimal auction over
    the high parts is copied, with its best single-bidder posted price as
    reserve.
    """
    n = pool.n
    ideal = ideal_revenue(pool, "optimal_auction", limit)
    e_opt = ideal.economy(pool)
    opt = ideal.value
    th = compute_thresholds(e_opt, "opt_n")
    H = th.H
    interim = myerson_interim(e_opt)
    low = math.fsum(o.revenue_where(o.values <= H) for o in interim)
    prov = {"opt": opt, "opt_counts": list(ideal.counts), "H": H, "low_contribution": low}
    if low >= opt / 2:
        d = e_opt.bidders[th.argmax_H]
        plan = ReservePlan(d, H, "low_dominant", _pool_index(pool, d), prov)
    else:
        tilde = Economy(tuple(truncate_below(d, H, strict=False) for d in e_opt.bidders))
        per_bidder = [o.revenue for o in myerson_interim(tilde)]
        best = int(np.argmax(per_bidder))
        p1, q1 = optimal_posted_price(tilde.bidders[best])
        prov.update(bidder_revenues=per_bidder, bidder=best, p1=p1, q1=q1)
        d = e_opt.bidders[best]
        plan = ReservePlan(d, p1, "high_dominant", _pool_index(pool, d), prov)
    revenue = second_price_with_reserve_revenue(Economy.homogeneous(plan.distribution, n), plan.reserve)
    plan.provenance["revenue"] = revenue
    return plan, revenue


# -- homogeneous, second price -------------------------------------------------------


@dataclass
class HomogeneousChoice:
    distribution: ValueDistribution
    revenue: float
    case: str
    pool_index: int
    provenance: dict = field(default_factory=dict)

    def __iter__(self):
        yield self.distribution
        yield self.revenue


def sec3_constant_factor(pool: DistributionPool, limit: int = DEFAULT_LIMIT) -> HomogeneousChoice:
    """Homogeneous second-price economy earning a constant fraction of the ideal second-price revenue.

    Unpacks as ``(distribution, revenue)``.
    """
    n = pool.n
    if n < 3:
        raise ValueError("the constant-factor construction needs n >= 3")
    ideal = ideal_revenue(pool, "second_price", limit)
    e_opt = ideal.economy(pool)
    opt = ideal.value
    th = compute_thresholds(e_opt, "sp_n_minus_1")
    H = th.H
    tilde = Economy(tuple(truncate_below(d, H, strict=False) for d in e_opt.bidders))
    high = sp(tilde)
    low = opt - high
    prov = {"opt": opt, "opt_counts": list(ideal.counts), "H": H, "low_contribution": low, "alpha": SP_ALPHA}
    if low >= SP_ALPHA * opt:
        d = e_opt.bidders[th.argmax_H]
        return HomogeneousChoice(d, sp(Economy.homogeneous(d, n)), "low_dominant", _pool_index(pool, d), prov)
    pairs = all_pair_contributions(tilde)
    top = max(pairs, key=lambda pc: pc.value)  # first maximum in (i, j) order
    a, b = top.i, top.j
    half = n // 2
    da, db = tilde.bidders[a], tilde.bidders[b]
    prov.update(
        pair=(a, b),
        pair_value=top.value,
        mixed_revenue=sp(Economy(tuple([da] * half + [db] * (n - half)))),
        min_of_maxima=expected_min_of_group_maxima([da] * half, [db] * (n - half)),
    )
    cands = []
    for k in (a, b):
        d = e_opt.bidders[k]
        cands.append((sp(Economy.homogeneous(d, n)), d))
    rev_a, rev_b = cands[0][0], cands[1][0]
    prov["candidate_revenues"] = [rev_a, rev_b]
    rev, d = cands[0] if rev_a >= rev_b else cands[1]
    return HomogeneousChoice(d, rev, "high_dominant", _pool_index(pool, d), prov)


# -- few distributions, second price --------------------------------------------------


@dataclass
class GroupingPlan:
    """Bidders of an economy grouped by their rounded middle/high probability vector."""

    groups: list[tuple[int, ...]]
    signatures: list[tuple[int, ...]]
    m: int
    gamma: float
    big_threshold: int
    L: float
    H: float
    step: float
    n: int
    argmax_L: int
    degenerate: bool = False
    threshold_mass: float = 0.0

    @property
    def k(self) -> int:
        return len(self.groups)

    @property
    def flagged(self) -> bool:
        return self.degenerate or self.threshold_mass > THRESHOLD_MASS_FLAG

    def is_big(self, g: int) -> bool:
        return len(self.groups[g]) > self.big_threshold

    def max_units(self) -> int:
        return max((max(s) for s in self.signatures if s), default=0)

    def group_of(self) -> list[int]:
        out = [0] * self.n
        for g, members in enumerate(self.groups):
            for i in members:
                out[i] = g
        return out


def signature(d: ValueDistribution, L: float, H: float, step: float, gamma: float) -> tuple[int, ...]:
    """Probability units ``floor(p_j / gamma)`` on the middle grid points, then on ``H``."""
    grid = middle_grid(L, H, step)
    rounded = _round_middle(d, L, H, step).as_dict()
    points = list(grid) + [H]
    return tuple(prob_units(rounded.get(float(v), 0.0), gamma) for v in points)


def build_grouping(
    opt_economy: Economy, eps: float, opt_value: float, allow_degenerate: bool = False
) -> GroupingPlan:
    """Partition the bidders of ``opt_economy`` by rounded signature.

    ``opt_value`` sets the grid step ``eps * opt_value``; any positive lower
    bound on the optimum works (a smaller step only refines the grid). When
    ``H <= L`` there are no middle values: this raises unless
    ``allow_degenerate``, in which case all bidders form one flagged group.
    """
    if not 0 < eps < 1 / 8:
        raise ValueError("eps must lie in (0, 1/8)")
    if opt_value <= 0:
        raise ValueError("opt_value must be positive")
    n = opt_economy.n
    th = compute_thresholds(opt_economy, "eps", eps)
    L, H = th.L, th.H
    gamma = eps**8 / (16 * n)
    step = eps * opt_value
    big = math.ceil(1 / eps - 1e-12)
    on_threshold = 0.0
    for d in opt_economy.bidders:
        on_threshold += math.fsum(p for v, p in zip(d.support, d.probs) if v == L or v == H)
    on_threshold /= n
    if H <= L:
        if not allow_degenerate:
            raise ValueError(f"degenerate thresholds: H={H} <= L={L}")
        return GroupingPlan(
            [tuple(range(n))], [()], 0, gamma, big, L, H, step, n, th.argmax_L, True, on_threshold
        )
    m = len(middle_grid(L, H, step))
    index: dict[tuple[int, ...], int] = {}
    groups: list[list[int]] = []
    sigs: list[tuple[int, ...]] = []
    for i, d in enumerate(opt_economy.bidders):
        s = signature(d, L, H, step, gamma)
        if s not in index:
            index[s] = len(groups)
            groups.append([])
            sigs.append(s)
        groups[index[s]].append(i)
    return GroupingPlan(
        [tuple(g) for g in groups], sigs, m, gamma, big, L, H, step, n, th.argmax_L, False, on_threshold
    )


@dataclass
class BoxedSample:
    """One run of the group resampling step: bidder ``i`` takes the distribution of bidder ``source[i]``."""

    source: list[int]
    indices: dict[int, list[int]]  # big group -> s_i per member, in member order
    representatives: dict[int, list[int]]  # big group -> sampled member bidders (length T)


def boxed_sample(plan: GroupingPlan, rng: np.random.Generator) -> BoxedSample:
    """Small groups are copied; each big group draws ``T`` members with repetition and every member picks one uniformly."""
    T = plan.big_threshold
    source = list(range(plan.n))
    indices, reps = {}, {}
    for g, members in enumerate(plan.groups):
        if not plan.is_big(g):
            continue
        s = rng.integers(0, T, size=len(members))
        picks = rng.integers(0, len(members), size=T)
        rep = [members[int(k)] for k in picks]
        for i, si in zip(members, s):
            source[i] = rep[int(si)]
        indices[g] = [int(x) for x in s]
        reps[g] = rep
    return BoxedSample(source, indices, reps)


def assignment_counts(source: Sequence[int], n: int) -> np.ndarray:
    """``N_a``: how many bidders were assigned bidder ``a``'s distribution."""
    return np.bincount(np.asarray(source, dtype=int), minlength=n)


def pair_assignment_counts(source: Sequence[int], n: int) -> np.ndarray:
    """``n_{a,b} = N_a N_b`` for ``a != b``: ordered bidder pairs assigned ``(D_a, D_b)``."""
    N = assignment_counts(source, n)
    out = np.outer(N, N)
    np.fill_diagonal(out, N * (N - 1))
    return out


@dataclass
class ShrinkResult:
    economy: Economy
    kept: tuple[int, ...]
    removed: tuple[int, ...]
    revenue: float
    base_revenue: float
    mean_revenue: float
    std_error: float
    subsets: int


def _best_subset(e: Economy, size: int, rng: np.random.Generator, tries: int) -> ShrinkResult:
    if size < 2:
        raise ValueError("subset must keep at least two bidders")
    revs, best, best_keep = [], -math.inf, None
    for _ in range(tries):
        keep = tuple(sorted(int(k) for k in rng.choice(e.n, size=size, replace=False)))
        r = sp(Economy(tuple(e.bidders[k] for k in keep)))
        revs.append(r)
        if r > best:
            best, best_keep = r, keep
    arr = np.asarray(revs)
    se = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
    removed = tuple(k for k in range(e.n) if k not in best_keep)
    return ShrinkResult(
        Economy(tuple(e.bidders[k] for k in best_keep)),
        best_keep,
        removed,
        best,
        sp(e),
        float(arr.mean()),
        se,
        tries,
    )


def random_shrink(e: Economy, eps: float, seed: int, tries: int) -> ShrinkResult:
    """Best of ``tries`` uniformly random subsets of ``floor((1 - eps) n)`` bidders."""
    size = math.floor((1 - eps) * e.n + 1e-9)
    if size < 2:
        raise ValueError("floor((1 - eps) n) must be >= 2")
    return _best_subset(e, size, np.random.default_rng(seed), tries)


@dataclass
class ConstructionResult:
    economy: Economy
    pool_indices: list[int]
    revenue: float
    opt_value: float
    grouping: GroupingPlan
    provenance: dict
    attempt_revenues: list[float]

    @property
    def distinct_distributions(self) -> int:
        return len(set(self.pool_indices))

    @property
    def ratio(self) -> float:
        return self.revenue / self.opt_value if self.opt_value > 0 else 1.0


def eps_construct(
    pool: DistributionPool,
    eps: float,
    seed: int,
    tries: int,
    limit: int = DEFAULT_LIMIT,
    opt_lower_bound: float | None = None,
) -> ConstructionResult:
    """Economy using few distinct distributions that keeps almost all second-price revenue.

    Each attempt resamples the big groups of the optimal economy, appends
    ``ceil(eps n)`` bidders from the distribution defining ``L``, then keeps
    the best of ``tries`` random ``n``-bidder subsets. The attempt with the
    highest exact revenue is returned; ties keep the earliest attempt.
    """
    if not 0 < eps < 1 / 8:
        raise ValueError("eps must lie in (0, 1/8)")
    if tries < 1:
        raise ValueError("tries must be >= 1")
    n = pool.n
    ideal = ideal_revenue(pool, "second_price", limit)
    opt = ideal.value
    opt_index = [k for k, c in enumerate(ideal.counts) for _ in range(c)]
    e_opt = Economy(tuple(pool.members[k] for k in opt_index))
    if opt <= 0:
        return ConstructionResult(
            e_opt, opt_index, 0.0, 0.0,
            GroupingPlan([tuple(range(n))], [()], 0, 0.0, 1, 0.0, 0.0, 0.0, n, 0, True),
            {"seed": seed, "note": "zero optimum"}, [0.0],
        )
    plan = build_grouping(e_opt, eps, opt_lower_bound or opt, allow_degenerate=True)
    low_bidder = plan.argmax_L
    add = math.ceil(eps * n - 1e-12)
    best = None
    revenues = []
    for t in range(tries):
        rng = np.random.default_rng([seed, t])
        bs = boxed_sample(plan, rng)
        idx = [opt_index[s] for s in bs.source] + [opt_index[low_bidder]] * add
        grown = Economy(tuple(pool.members[k] for k in idx))
        shrunk = _best_subset(grown, n, rng, tries)
        revenues.append(shrunk.revenue)
        if best is None or shrunk.revenue > best[0]:
            best = (shrunk.revenue, t, bs, idx, shrunk)
    rev, t, bs, idx, shrunk = best
    final_idx = [idx[k] for k in shrunk.kept]
    prov = {
        "seed": seed,
        "try": t,
        "tries": tries,
        "eps": eps,
        "opt": opt,
        "opt_counts": list(ideal.counts),
        "assignment": bs.source,
        "s_indices": {str(g): v for g, v in bs.indices.items()},
        "representatives": {str(g): v for g, v in bs.representatives.items()},
        "added_low_bidders": add,
        "low_pool_index": opt_index[low_bidder],
        "removed": list(shrunk.removed),
        "pre_injection_counts": np.bincount([opt_index[s] for s in bs.source], minlength=len(pool.members)).tolist(),
    }
    return ConstructionResult(
        Economy(tuple(pool.members[k] for k in final_idx)),
        final_idx,
        rev,
        opt,
        plan,
        prov,
        revenues,
    )
