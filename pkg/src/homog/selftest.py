"""Invariant checks runnable without pytest (``homog selftest``).

Each check draws seeded random instances, compares the exact engines with
enumeration oracles or asserts a guarantee, and reports the worst case.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import brute, claims
from .constructions import (
    HOMOG_OPT_FACTOR,
    HOMOG_SP_FACTOR,
    build_grouping,
    eps_construct,
    sec3_constant_factor,
    signature,
    theorem1_construct,
)
from .dist import ValueDistribution
from .revenue import (
    Economy,
    all_pair_contributions,
    exact_second_price_revenue,
    exact_welfare,
    expected_min_of_group_maxima,
    monte_carlo_revenue,
    myerson_optimal_revenue,
    second_price_with_reserve_revenue,
    sp,
)
from .search import DistributionPool, ideal_revenue

TOL = 1e-9


def random_distribution(
    rng: np.random.Generator, max_atoms: int = 5, vmax: float = 10.0, label: str = "", integer: bool = False
) -> ValueDistribution:
    k = int(rng.integers(1, max_atoms + 1))
    if integer:
        vals = rng.choice(int(vmax) + 1, size=k, replace=False).astype(float)
    else:
        vals = np.round(rng.uniform(0, vmax, size=k), 3)
    w = rng.random(k) + 0.05
    return ValueDistribution.from_atoms(vals, w / w.sum(), label)


def random_pool(rng: np.random.Generator, size: int, n: int, **kw) -> DistributionPool:
    return DistributionPool(
        tuple(random_distribution(rng, label=f"D{k + 1}", **kw) for k in range(size)), n
    )


def random_economy(rng: np.random.Generator, n: int, **kw) -> Economy:
    return Economy(tuple(random_distribution(rng, **kw) for _ in range(n)))


@dataclass
class CheckResult:
    name: str
    passed: bool
    cases: int
    detail: str
    seconds: float


def check_engines(cases: int, seed: int) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        n = int(rng.integers(2, 5))
        e = random_economy(rng, n, integer=bool(rng.integers(0, 2)))
        tot, lo, mid, hi = brute.brute_second_price(e, 2.0, 6.0)
        r = exact_second_price_revenue(e, 2.0, 6.0)
        errs = [abs(r.total - tot), abs(r.low - lo), abs(r.mid - mid), abs(r.high - hi)]
        errs.append(abs(exact_welfare(e) - brute.brute_welfare(e)))
        res = float(rng.uniform(0, 10))
        errs.append(abs(second_price_with_reserve_revenue(e, res) - brute.brute_reserve(e, res)))
        bp = brute.brute_pair_contributions(e)
        errs.extend(abs(pc.value - bp[(pc.i, pc.j)]) for pc in all_pair_contributions(e))
        cut = int(rng.integers(1, n))
        g1, g2 = e.bidders[:cut], e.bidders[cut:]
        errs.append(abs(expected_min_of_group_maxima(g1, g2) - brute.brute_min_of_group_maxima(g1, g2)))
        if n <= 3:
            errs.append(abs(myerson_optimal_revenue(e) - brute.lp_optimal_revenue(e)))
        worst = max(worst, *errs)
    return CheckResult("engines_vs_enumeration", worst <= TOL, cases, f"max abs error {worst:.3g}", 0.0)


def check_homogeneous_optimal(cases: int, seed: int) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = math.inf
    for _ in range(cases):
        pool = random_pool(rng, 3, int(rng.integers(3, 5)))
        ideal = ideal_revenue(pool, "optimal_auction").value
        _, rev = theorem1_construct(pool)
        if ideal > 0:
            worst = min(worst, rev / ideal)
    ok = worst >= HOMOG_OPT_FACTOR - TOL
    return CheckResult("reserve_construction_bound", ok, cases, f"min ratio {worst:.4f} vs {HOMOG_OPT_FACTOR:.4f}", 0.0)


def check_homogeneous_sp(cases: int, seed: int) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = math.inf
    for _ in range(cases):
        pool = random_pool(rng, 3, int(rng.integers(3, 5)))
        ideal = ideal_revenue(pool, "second_price").value
        rev = sec3_constant_factor(pool).revenue
        if ideal > 0:
            worst = min(worst, rev / ideal)
    ok = worst >= HOMOG_SP_FACTOR - TOL
    return CheckResult("homogeneous_sp_bound", ok, cases, f"min ratio {worst:.4f} vs {HOMOG_SP_FACTOR:.5f}", 0.0)


def check_inequalities(cases: int, seed: int) -> CheckResult:
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(cases):
        n = int(rng.integers(1, 60))
        x = Fraction(int(rng.integers(0, 1001)), 1000 * n)
        lhs, rhs = claims.tail_concavity_sides(x, n)
        bad += lhs < rhs
        n2 = int(rng.integers(2, 40))
        a, b = sorted(Fraction(int(rng.integers(0, 1001)), 1000) for _ in range(2))
        a, b = max(a, Fraction(1, n2)), max(b, Fraction(1, n2))
        bad += claims.single_exceed_mass(a, n2) < claims.single_exceed_mass(b, n2)
        p, q = claims.product_vs_squares(Fraction(int(rng.integers(-999, 1000)), 7), Fraction(int(rng.integers(-999, 1000)), 11))
        bad += p > q
    return CheckResult("helper_inequalities", bad == 0, 3 * cases, f"{bad} violations", 0.0)


def check_low_value_lemma() -> CheckResult:
    worst = math.inf
    cases = 0
    for eps in (0.05, 0.1, 0.2):
        for n in (50, 100, 400):
            pr = claims.low_value_lemma_probability(eps, n)
            worst = min(worst, pr - (1 - 3 * eps))
            cases += 1
    return CheckResult("low_value_lemma", worst >= -TOL, cases, f"min slack {worst:.4f}", 0.0)


def check_monte_carlo(seed: int) -> CheckResult:
    rng = np.random.default_rng(seed)
    e = random_economy(rng, 4)
    exact = sp(e)
    est = monte_carlo_revenue(e, 200_000, seed)
    z = abs(est.total - exact) / max(est.ci_halfwidth / 1.96, 1e-300)
    again = monte_carlo_revenue(e, 200_000, seed, workers=3)
    ok = z < 5 and again.total == est.total
    return CheckResult("monte_carlo_consistency", ok, 1, f"|z| = {z:.2f}, parallel match {again.total == est.total}", 0.0)


def check_eps_construction(cases: int, seed: int) -> CheckResult:
    rng = np.random.default_rng(seed)
    eps = 0.1
    problems = []
    for c in range(cases):
        pool = random_pool(rng, 2, 10)
        res = eps_construct(pool, eps, seed=c, tries=5)
        plan = res.grouping
        if res.distinct_distributions > plan.big_threshold * plan.k:
            problems.append("distinct")
        if not plan.degenerate:
            opt_idx = [k for k, n in enumerate(res.provenance["opt_counts"]) for _ in range(n)]
            e_opt = Economy(tuple(pool.members[k] for k in opt_idx))
            plan2 = build_grouping(e_opt, eps, res.opt_value)
            for i, s in enumerate(res.provenance["assignment"]):
                a = signature(e_opt.bidders[i], plan2.L, plan2.H, plan2.step, plan2.gamma)
                b = signature(e_opt.bidders[s], plan2.L, plan2.H, plan2.step, plan2.gamma)
                if a != b:
                    problems.append("signature")
            if plan.m > claims.grid_size_bound(eps) or plan.max_units() > claims.units_bound(eps):
                problems.append("structure")
            if plan.H > claims.h_bound(res.opt_value, eps) + TOL:
                problems.append("H bound")
    return CheckResult("few_distributions_invariants", not problems, cases, ", ".join(sorted(set(problems))) or "ok", 0.0)


def run_selftest(quick: bool = True, seed: int = 0) -> list[CheckResult]:
    scale = 1 if quick else 5
    jobs = [
        lambda: check_engines(40 * scale, seed),
        lambda: check_homogeneous_optimal(20 * scale, seed + 1),
        lambda: check_homogeneous_sp(20 * scale, seed + 2),
        lambda: check_inequalities(2000 * scale, seed + 3),
        check_low_value_lemma,
        lambda: check_monte_carlo(seed + 4),
        lambda: check_eps_construction(3 * scale, seed + 5),
    ]
    out = []
    for job in jobs:
        t0 = time.perf_counter()
        r = job()
        r.seconds = time.perf_counter() - t0
        out.append(r)
    return out
