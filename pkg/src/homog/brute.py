"""Direct profile-enumeration oracles.

These evaluate every quantity of :mod:`homog.revenue` by walking the full
product of the bidders' supports. They share no code with the survival-grid
engines and are used to cross-check them on small economies.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .revenue import Economy

MAX_PROFILES = 100_000


@dataclass
class Profiles:
    values: np.ndarray  # (P, n)
    weights: np.ndarray  # (P,)


def enumerate_profiles(e: Economy, limit: int = MAX_PROFILES) -> Profiles:
    count = e.profile_count()
    if count > limit:
        raise ValueError(f"{count} profiles exceed the enumeration limit {limit}")
    vals = np.array(list(itertools.product(*[d.support for d in e.bidders])), dtype=float)
    probs = np.array(list(itertools.product(*[d.probs for d in e.bidders])), dtype=float)
    vals = vals.reshape(count, e.n)
    probs = probs.reshape(count, e.n)
    return Profiles(vals, probs.prod(axis=1))


def _expect(P: Profiles, x: np.ndarray) -> float:
    return math.fsum(P.weights * x)


def second_highest(values: np.ndarray) -> np.ndarray:
    if values.shape[1] < 2:
        return np.zeros(values.shape[0])
    return np.sort(values, axis=1)[:, -2]


def brute_second_price(e: Economy, L: float = 0.0, H: float = math.inf) -> tuple[float, float, float, float]:
    P = enumerate_profiles(e)
    y = second_highest(P.values)
    low = _expect(P, y * (y < L))
    mid = _expect(P, y * ((y >= L) & (y < H)))
    high = _expect(P, y * (y >= H))
    return _expect(P, y), low, mid, high


def brute_welfare(e: Economy) -> float:
    P = enumerate_profiles(e)
    return _expect(P, P.values.max(axis=1))


def brute_reserve(e: Economy, reserve: float) -> float:
    P = enumerate_profiles(e)
    top = P.values.max(axis=1)
    y = second_highest(P.values)
    pay = np.where(top >= reserve, np.maximum(y, reserve), 0.0)
    return _expect(P, pay)


def brute_pair_contributions(e: Economy) -> dict[tuple[int, int], float]:
    """``r_{i,j}`` for every pair, with top/second slots assigned by lowest index among ties."""
    P = enumerate_profiles(e)
    v = P.values.copy()
    top = np.argmax(v, axis=1)
    masked = v.copy()
    masked[np.arange(len(v)), top] = -np.inf
    sec = np.argmax(masked, axis=1)
    y = masked[np.arange(len(v)), sec]
    lo, hi = np.minimum(top, sec), np.maximum(top, sec)
    out = {}
    for i in range(e.n):
        for j in range(i + 1, e.n):
            sel = (lo == i) & (hi == j)
            out[(i, j)] = _expect(P, np.where(sel, y, 0.0))
    return out


def brute_min_of_group_maxima(e1, e2) -> float:
    e1, e2 = list(e1), list(e2)
    P = enumerate_profiles(Economy(tuple(e1 + e2)))
    a = P.values[:, : len(e1)].max(axis=1)
    b = P.values[:, len(e1):].max(axis=1)
    return _expect(P, np.minimum(a, b))


def brute_posted_price(d) -> float:
    """Best single-bidder revenue over posted prices from the support."""
    best = 0.0
    for v in d.support:
        best = max(best, v * math.fsum(p for x, p in zip(d.support, d.probs) if x >= v))
    return best


def lp_optimal_revenue(e: Economy, limit: int = 400) -> float:
    """Optimal dominant-strategy revenue by linear programming over all mechanisms.

    Variables are the allocation ``x_i(v)`` and payment ``p_i(v)`` at every
    profile; constraints are feasibility, ex-post individual rationality and
    dominant-strategy incentive compatibility against every misreport.
    """
    n = e.n
    supports = [d.support for d in e.bidders]
    profiles = list(itertools.product(*[range(len(s)) for s in supports]))
    if len(profiles) > limit:
        raise ValueError("too many profiles for the LP oracle")
    index = {prof: k for k, prof in enumerate(profiles)}
    P = len(profiles)
    weight = np.array(
        [math.prod(e.bidders[i].probs[prof[i]] for i in range(n)) for prof in profiles]
    )
    nvar = 2 * n * P

    def xv(i, k):
        return i * P + k

    def pv(i, k):
        return n * P + i * P + k

    rows, cols, data, rhs = [], [], [], []
    r = 0
    for k, prof in enumerate(profiles):
        for i in range(n):
            rows.append(r); cols.append(xv(i, k)); data.append(1.0)
        rhs.append(1.0); r += 1
        for i in range(n):
            vi = supports[i][prof[i]]
            # IR: p - v x <= 0
            rows += [r, r]; cols += [pv(i, k), xv(i, k)]; data += [1.0, -vi]
            rhs.append(0.0); r += 1
            for alt in range(len(supports[i])):
                if alt == prof[i]:
                    continue
                k2 = index[prof[:i] + (alt,) + prof[i + 1:]]
                # v x(v') - p(v') - v x(v) + p(v) <= 0
                rows += [r, r, r, r]
                cols += [xv(i, k2), pv(i, k2), xv(i, k), pv(i, k)]
                data += [vi, -1.0, -vi, 1.0]
                rhs.append(0.0); r += 1
    from scipy.sparse import csr_matrix

    A = csr_matrix((data, (rows, cols)), shape=(r, nvar))
    c = np.zeros(nvar)
    for i in range(n):
        c[n * P + i * P: n * P + (i + 1) * P] = -weight
    bounds = [(0.0, 1.0)] * (n * P) + [(None, None)] * (n * P)
    res = linprog(
        c,
        A_ub=A,
        b_ub=np.array(rhs),
        bounds=bounds,
        method="highs-ds",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status != 0:
        raise RuntimeError(f"LP oracle failed: {res.message}")
    return -res.fun
