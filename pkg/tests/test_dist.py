import math

import pytest
from hypothesis import given, strategies as st

from homog.dist import (
    ValueDistribution,
    cdf_below,
    constant,
    equal_revenue,
    middle_grid,
    quantile_inf,
    round_middle_values,
    round_probs_down,
    smooth_atoms,
    survival,
    truncate_below,
    two_point,
)


def D(mapping):
    return ValueDistribution.from_mapping(mapping)


@st.composite
def distributions(draw, max_atoms=6, vmax=20.0):
    k = draw(st.integers(1, max_atoms))
    vals = draw(st.lists(st.floats(0, vmax, allow_nan=False), min_size=k, max_size=k, unique=True))
    w = draw(st.lists(st.floats(0.01, 1.0), min_size=k, max_size=k))
    s = math.fsum(w)
    return ValueDistribution.from_atoms(vals, [x / s for x in w])


def assert_valid(d):
    assert abs(math.fsum(d.probs) - 1) <= 1e-12
    assert all(a < b for a, b in zip(d.support, d.support[1:]))
    assert all(p > 0 for p in d.probs)


def test_construction_merges_and_prunes():
    d = ValueDistribution.from_atoms([2, 1, 2, 3], [0.25, 0.25, 0.5, 0.0])
    assert d.support == (1.0, 2.0)
    assert d.probs == (0.25, 0.75)


@pytest.mark.parametrize(
    "support, probs",
    [((1.0, 1.0), (0.5, 0.5)), ((2.0, 1.0), (0.5, 0.5)), ((-1.0,), (1.0,)), ((1.0,), (0.9,)), ((math.inf,), (1.0,))],
)
def test_invalid_distributions_rejected(support, probs):
    with pytest.raises(ValueError):
        ValueDistribution(support, probs)


def test_cdf_strict_and_not():
    assert cdf_below(constant(1), 1) == 0.0
    assert cdf_below(constant(1), 1, strict=False) == 1.0
    assert cdf_below(D({0: 0.9, 10: 0.1}), 5) == 0.9
    assert survival(D({0: 0.9, 10: 0.1}), 10) == 0.1
    assert survival(D({0: 0.9, 10: 0.1}), 10, strict=True) == 0.0


def test_quantiles():
    assert quantile_inf(constant(4), 0.3) == 4
    n, eps = 10, 0.05
    assert quantile_inf(two_point(0, 7, eps), 1 - 1 / n) == 0
    assert quantile_inf(D({0: 0.5, 1: 0.3, 2: 0.2}), 0.9) == 2
    with pytest.raises(ValueError):
        quantile_inf(constant(1), 1.0)


def test_truncate_below_examples():
    assert truncate_below(D({1: 0.5, 10: 0.5}), 5).as_dict() == {0: 0.5, 10: 0.5}
    assert truncate_below(D({10: 1.0}), 5).as_dict() == {10: 1.0}
    assert truncate_below(D({1: 0.3, 2: 0.3, 3: 0.4}), 10).as_dict() == {0: 1.0}
    assert truncate_below(D({1: 0.5, 5: 0.5}), 5, strict=False).as_dict() == {0: 1.0}


def test_round_middle_examples():
    L, H, step = 2.0, 12.0, 1.0
    assert round_middle_values(D({L + 1.5 * step: 1.0}), L, H, step).as_dict() == {L + step: 1.0}
    assert round_middle_values(D({H + 7: 1.0}), L, H, step).as_dict() == {H: 1.0}
    got = round_middle_values(D({L: 0.5, L + 2.3 * step: 0.5}), L, H, step).as_dict()
    assert got == {L: 0.5, L + 2 * step: 0.5}
    with pytest.raises(ValueError):
        round_middle_values(constant(1), 0, 1, 1)


def test_round_probs_examples():
    got = round_probs_down(D({0: 0.9, 5: 0.1}), 0.03).as_dict()
    assert got[5] == pytest.approx(0.09) and got[0] == pytest.approx(0.91)
    assert round_probs_down(D({0: 0.5, 5: 0.5}), 0.5).as_dict() == {0: 0.5, 5: 0.5}
    assert round_probs_down(D({0: 0.999, 5: 0.001}), 0.01).as_dict() == {0: 1.0}


def test_smooth_examples():
    assert smooth_atoms(constant(1), 0.1, 1).as_dict() == {1: 1.0}
    assert smooth_atoms(constant(1), 0.2, 2).as_dict() == {1: 0.5, 1.2: 0.5}
    got = smooth_atoms(D({1: 0.4, 2: 0.6}), 0.2, 2).as_dict()
    assert got == pytest.approx({1: 0.2, 1.2: 0.2, 2: 0.3, 2.2: 0.3})


def test_equal_revenue_survival_at_grid_points():
    d = equal_revenue(1000.0, 50)
    for x in d.support:
        assert survival(d, x) == pytest.approx(1 / x, rel=1e-12)
    assert d.support[0] == 1.0 and d.max_value == 1000.0


def test_middle_grid_stays_below_high():
    g = middle_grid(1.0, 3.0, 0.5)
    assert list(g) == [1.0, 1.5, 2.0, 2.5]


@given(distributions(), st.floats(0, 25))
def test_truncate_preserves_survival_above(d, h):
    t = truncate_below(d, h)
    assert_valid(t)
    for v in d.support:
        if v >= h:
            assert survival(t, v) == pytest.approx(survival(d, v), abs=1e-12)


@given(distributions(), st.floats(0, 5), st.floats(1, 15), st.floats(0.1, 2))
def test_round_middle_moves_values_down_by_less_than_step(d, L, width, step):
    H = L + width
    if step >= H - L:
        return
    r = round_middle_values(d, L, H, step)
    assert_valid(r)
    # pointwise map of each atom
    for v in d.support:
        if L <= v < H:
            j = math.floor((v - L) / step + 1e-12)
            assert 0 <= v - (L + j * step) < step + 1e-9


@given(distributions(), st.floats(1e-4, 0.5))
def test_round_probs_removes_bounded_mass(d, gamma):
    r = round_probs_down(d, gamma)
    assert_valid(r)
    orig = d.as_dict()
    lost = 0.0
    for v, p in orig.items():
        if v == 0:
            continue
        q = r.as_dict().get(v, 0.0)
        assert q <= p + 1e-12
        assert p - q < gamma + 1e-12
        lost += p - q
    assert lost <= len(d) * gamma + 1e-12


@given(distributions(), st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_quantile_monotone(d, a, b):
    a, b = sorted((a, b))
    assert quantile_inf(d, a) <= quantile_inf(d, b)


@given(distributions(), st.floats(0.01, 3), st.integers(1, 5))
def test_smooth_preserves_atom_mass(d, width, grid):
    s = smooth_atoms(d, width, grid)
    assert_valid(s)
    assert s.mean() == pytest.approx(d.mean() + (width / 2 if grid > 1 else 0), abs=1e-9)
