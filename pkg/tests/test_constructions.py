import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from homog.constructions import (
    HOMOG_OPT_FACTOR,
    HOMOG_SP_FACTOR,
    SP_ALPHA,
    assignment_counts,
    boxed_sample,
    build_grouping,
    eps_construct,
    pair_assignment_counts,
    random_shrink,
    sec3_constant_factor,
    signature,
    theorem1_construct,
)
from homog.dist import ValueDistribution, constant, two_point
from homog.instances import make_intro_instance
from homog.revenue import Economy, sp
from homog.search import DistributionPool
from homog.selftest import random_distribution, random_pool


def test_constants():
    assert HOMOG_OPT_FACTOR == pytest.approx(0.31606, abs=1e-5)
    assert SP_ALPHA == pytest.approx(1 / (2 * math.e - 3))
    assert HOMOG_SP_FACTOR == pytest.approx(0.10844, abs=1e-5)


def test_reserve_construction_on_intro():
    pool = make_intro_instance(10, 1e-3)
    plan, rev = theorem1_construct(pool)
    assert plan.distribution is pool.members[0] and plan.reserve == 1.0
    assert rev == pytest.approx(1.0, abs=1e-12)
    assert rev / plan.provenance["opt"] >= HOMOG_OPT_FACTOR


def test_reserve_construction_single_constant():
    plan, rev = theorem1_construct(DistributionPool((constant(6),), 4))
    assert plan.reserve == 6 and rev == 6


def test_reserve_construction_with_dominant_member():
    rng = np.random.default_rng(3)
    pool = random_pool(rng, 2, 3)
    big = constant(1e6, "big")
    pool = DistributionPool(pool.members + (big,), 3)
    plan, rev = theorem1_construct(pool)
    assert plan.distribution is big and rev == pytest.approx(1e6)


def test_sec3_single_constant():
    d, rev = sec3_constant_factor(DistributionPool((constant(2.5),), 4))
    assert rev == 2.5


def test_sec3_binomial_tail():
    n, v = 6, 7.0
    d = two_point(0, v, 2 / n)
    choice = sec3_constant_factor(DistributionPool((d,), n))
    p = Fraction(2, n)
    tail = 1 - (1 - p) ** n - n * p * (1 - p) ** (n - 1)
    assert choice.revenue == pytest.approx(v * float(tail), abs=1e-12)


def test_sec3_rejects_two_bidders():
    with pytest.raises(ValueError):
        sec3_constant_factor(DistributionPool((constant(1),), 2))


@given(st.integers(0, 2**32 - 1), st.integers(3, 5))
@settings(max_examples=25)
def test_homogeneous_constructions_meet_bounds(seed, n):
    pool = random_pool(np.random.default_rng(seed), 3, n)
    plan, rev = theorem1_construct(pool)
    assert rev >= HOMOG_OPT_FACTOR * plan.provenance["opt"] - 1e-9
    choice = sec3_constant_factor(pool)
    assert choice.revenue >= HOMOG_SP_FACTOR * choice.provenance["opt"] - 1e-9


def test_grouping_single_distribution():
    d = ValueDistribution.from_mapping({1: 0.5, 3: 0.3, 9: 0.2})
    plan = build_grouping(Economy.homogeneous(d, 20), 0.1, 5.0)
    assert plan.groups == [tuple(range(20))]


def test_grouping_distinct_signatures_are_singletons():
    ds = [ValueDistribution.from_mapping({float(k): 0.5, 10.0: 0.5}) for k in range(1, 6)]
    plan = build_grouping(Economy(tuple(ds)), 0.1, 5.0)
    assert plan.k == 5 and not any(plan.is_big(g) for g in range(5))


def test_grouping_ignores_low_mass():
    # L sits at the 0.5 level; c puts it at 1, below which a and b differ
    eps = 0.1
    a = ValueDistribution.from_mapping({0.1: 0.3, 0.2: 0.3, 4: 0.3, 9: 0.1})
    b = ValueDistribution.from_mapping({0.15: 0.6, 4: 0.3, 9: 0.1})
    c = ValueDistribution.from_mapping({1: 0.6, 4: 0.3, 9: 0.1})
    e = Economy((a, b) * 100 + (c,))
    plan = build_grouping(e, eps, 4.0)
    assert plan.L == 1
    assert signature(a, plan.L, plan.H, plan.step, plan.gamma) == signature(b, plan.L, plan.H, plan.step, plan.gamma)
    assert plan.k == 2 and len(plan.groups[0]) == 200


def test_grouping_degenerate_thresholds():
    # with n = 200 both quantile levels land on the single atom, so H = L
    e = Economy.homogeneous(constant(3), 200)
    with pytest.raises(ValueError):
        build_grouping(e, 0.1, 3.0)
    plan = build_grouping(e, 0.1, 3.0, allow_degenerate=True)
    assert plan.degenerate and plan.flagged and plan.k == 1


def test_grouping_rejects_eps_out_of_range():
    with pytest.raises(ValueError):
        build_grouping(Economy.homogeneous(constant(1), 3), 0.2, 1.0)


def test_boxed_sample_copies_small_groups():
    ds = [ValueDistribution.from_mapping({float(k): 0.5, 10.0: 0.5}) for k in range(1, 5)]
    plan = build_grouping(Economy(tuple(ds)), 0.1, 5.0)
    bs = boxed_sample(plan, np.random.default_rng(0))
    assert bs.source == [0, 1, 2, 3] and bs.indices == {}


def test_pair_counts_are_products():
    src = [0, 0, 2, 2, 2]
    N = assignment_counts(src, 5)
    P = pair_assignment_counts(src, 5)
    assert list(N) == [2, 0, 3, 0, 0]
    assert P[0, 2] == 6 and P[2, 0] == 6 and P[0, 0] == 2 and P[1, 2] == 0


def test_boxed_sample_pair_expectation_in_big_group():
    """Pooled mean of n_{a,b} over same-group pairs approaches (1 - 1/|G|)(1 - 1/T)."""
    a = ValueDistribution.from_mapping({1: 0.5, 5: 0.5})
    e = Economy.homogeneous(a, 15)
    plan = build_grouping(e, 0.1, sp(e))
    assert plan.is_big(0)
    runs, g, T = 3000, 15, plan.big_threshold
    acc = np.zeros((g, g))
    for s in range(runs):
        acc += pair_assignment_counts(boxed_sample(plan, np.random.default_rng([2, s])).source, g)
    off = ~np.eye(g, dtype=bool)
    assert (acc / runs)[off].mean() == pytest.approx((1 - 1 / g) * (1 - 1 / T), abs=0.02)


def test_shrink_identical_bidders():
    e = Economy.homogeneous(constant(2), 10)
    res = random_shrink(e, 0.1, seed=0, tries=5)
    assert res.revenue == 2 and res.economy.n == 9


def test_shrink_keeps_the_two_nonzero_bidders():
    e = Economy((constant(4), constant(3)) + (constant(0),) * 8)
    res = random_shrink(e, 0.1, seed=1, tries=50)
    assert res.revenue == sp(e) and {0, 1} <= set(res.kept)


def test_shrink_six_bidders():
    e = Economy(tuple(random_distribution(np.random.default_rng([9, k])) for k in range(6)))
    res = random_shrink(e, 1 / 6, seed=3, tries=50)
    assert res.revenue >= (1 - 2 / 6) * sp(e)


def test_eps_construct_single_distribution():
    d = ValueDistribution.from_mapping({1: 0.4, 2: 0.6})
    res = eps_construct(DistributionPool((d,), 12), 0.1, seed=0, tries=3)
    assert res.economy.n == 12 and res.distinct_distributions == 1
    assert res.revenue == pytest.approx(sp(Economy.homogeneous(d, 12)))


def test_eps_construct_small_groups_copy_optimum():
    pool = random_pool(np.random.default_rng([6, 2]), 3, 8)
    res = eps_construct(pool, 0.1, seed=1, tries=4)
    assert all(not res.grouping.is_big(g) for g in range(res.grouping.k))
    assert res.provenance["pre_injection_counts"] == res.provenance["opt_counts"]


def test_eps_construct_is_deterministic_and_records_provenance():
    pool = random_pool(np.random.default_rng(42), 3, 12)
    a = eps_construct(pool, 0.1, seed=5, tries=10)
    b = eps_construct(pool, 0.1, seed=5, tries=10)
    assert a.pool_indices == b.pool_indices and a.attempt_revenues == b.attempt_revenues
    prov = a.provenance
    for key in ("seed", "try", "assignment", "s_indices", "representatives", "added_low_bidders", "removed"):
        assert key in prov
    assert prov["added_low_bidders"] == 2 and len(prov["removed"]) == 2
    assert a.revenue == max(a.attempt_revenues)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=10)
def test_eps_construct_invariants(seed):
    eps = 0.1
    pool = random_pool(np.random.default_rng(seed), 2, 12)
    res = eps_construct(pool, eps, seed=seed % 100, tries=3)
    plan = res.grouping
    assert res.economy.n == pool.n
    assert res.distinct_distributions <= math.ceil(1 / eps) * plan.k
    if not plan.degenerate:
        opt = [k for k, c in enumerate(res.provenance["opt_counts"]) for _ in range(c)]
        e_opt = Economy(tuple(pool.members[k] for k in opt))
        for i, s in enumerate(res.provenance["assignment"]):
            sig = lambda d: signature(d, plan.L, plan.H, plan.step, plan.gamma)
            assert sig(e_opt.bidders[i]) == sig(e_opt.bidders[s])
