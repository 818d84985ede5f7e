"""Finite discrete value distributions and the rounding transforms applied to them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

PROB_TOL = 1e-12


@dataclass(frozen=True)
class ValueDistribution:
    """A finite distribution over non-negative values.

    ``support`` is strictly increasing and ``probs`` is aligned with it.
    Build instances through :meth:`from_atoms`, which merges repeated
    values, prunes zero-probability atoms and validates the result.
    """

    support: tuple[float, ...]
    probs: tuple[float, ...]
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if len(self.support) != len(self.probs):
            raise ValueError("support and probs must have equal length")
        if not self.support:
            raise ValueError("distribution needs at least one atom")
        for v in self.support:
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"support values must be finite and >= 0, got {v!r}")
        for a, b in zip(self.support, self.support[1:]):
            if not a < b:
                raise ValueError("support must be strictly increasing")
        for p in self.probs:
            if not 0.0 < p <= 1.0 + PROB_TOL:
                raise ValueError(f"atom probabilities must lie in (0, 1], got {p!r}")
        total = math.fsum(self.probs)
        if abs(total - 1.0) > PROB_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")

    @classmethod
    def from_atoms(
        cls, values: Iterable[float], probs: Iterable[float], label: str = ""
    ) -> "ValueDistribution":
        acc: dict[float, float] = {}
        for v, p in zip(values, probs, strict=True):
            v, p = float(v), float(p)
            if p < 0:
                raise ValueError(f"negative probability {p!r}")
            if v == 0.0:
                v = 0.0  # fold -0.0
            acc[v] = acc.get(v, 0.0) + p
        items = sorted((v, p) for v, p in acc.items() if p > 0.0)
        if not items:
            raise ValueError("distribution has no positive mass")
        return cls(tuple(v for v, _ in items), tuple(p for _, p in items), label)

    @classmethod
    def from_mapping(cls, atoms: dict[float, float], label: str = "") -> "ValueDistribution":
        return cls.from_atoms(atoms.keys(), atoms.values(), label)

    def as_dict(self) -> dict[float, float]:
        return dict(zip(self.support, self.probs))

    def relabel(self, label: str) -> "ValueDistribution":
        return ValueDistribution(self.support, self.probs, label)

    def scaled(self, c: float) -> "ValueDistribution":
        """Multiply every support value by ``c > 0``."""
        if c <= 0:
            raise ValueError("scale factor must be positive")
        return ValueDistribution.from_atoms([c * v for v in self.support], self.probs, self.label)

    @cached_property
    def values_array(self) -> np.ndarray:
        return np.asarray(self.support, dtype=float)

    @cached_property
    def probs_array(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=float)

    @property
    def max_value(self) -> float:
        return self.support[-1]

    def mean(self) -> float:
        return math.fsum(v * p for v, p in zip(self.support, self.probs))

    def __len__(self) -> int:
        return len(self.support)

    def __repr__(self) -> str:
        atoms = ", ".join(f"{v:g}: {p:g}" for v, p in zip(self.support, self.probs))
        tag = f"{self.label}=" if self.label else ""
        return f"{tag}{{{atoms}}}"


# -- constructors -----------------------------------------------------------


def constant(value: float, label: str = "") -> ValueDistribution:
    return ValueDistribution.from_atoms([value], [1.0], label)


def two_point(low: float, high: float, p_high: float, label: str = "") -> ValueDistribution:
    """``high`` with probability ``p_high``, otherwise ``low``."""
    if not 0.0 <= p_high <= 1.0:
        raise ValueError("p_high must lie in [0, 1]")
    return ValueDistribution.from_atoms([low, high], [1.0 - p_high, p_high], label)


def equal_revenue(h: float, grid: int, label: str = "") -> ValueDistribution:
    """Discretized equal-revenue distribution on ``[1, h]``.

    Atoms sit at ``x_k = h ** (k / grid)`` for ``k = 0..grid``. The atom at
    ``x_k`` (``k < grid``) carries ``1/x_k - 1/x_{k+1}`` and the terminal atom
    at ``h`` carries ``1/h``, so ``Pr[X >= x_k] = 1/x_k`` at every grid point.
    """
    if h <= 1:
        raise ValueError("h must exceed 1")
    if grid < 1:
        raise ValueError("grid must be >= 1")
    xs = [h ** (k / grid) for k in range(grid)] + [float(h)]
    xs[0] = 1.0
    inv = [1.0 / x for x in xs]
    masses = [inv[k] - inv[k + 1] for k in range(grid)] + [inv[-1]]
    # absorb rounding so the total is 1 to float precision
    masses[0] = 1.0 - math.fsum(masses[1:])
    return ValueDistribution.from_atoms(xs, masses, label)


# -- queries ----------------------------------------------------------------


def cdf_below(d: ValueDistribution, t: float, strict: bool = True) -> float:
    """``Pr[X < t]``, or ``Pr[X <= t]`` when ``strict`` is False."""
    if not math.isfinite(t):
        raise ValueError("threshold must be finite")
    if strict:
        return math.fsum(p for v, p in zip(d.support, d.probs) if v < t)
    return math.fsum(p for v, p in zip(d.support, d.probs) if v <= t)


def survival(d: ValueDistribution, t: float, strict: bool = False) -> float:
    """``Pr[X >= t]``, or ``Pr[X > t]`` when ``strict`` is True."""
    if strict:
        return math.fsum(p for v, p in zip(d.support, d.probs) if v > t)
    return math.fsum(p for v, p in zip(d.support, d.probs) if v >= t)


def quantile_inf(d: ValueDistribution, q: float) -> float:
    """``inf{T : Pr[X <= T] >= q}`` for ``0 < q < 1``."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile level must lie in (0, 1), got {q!r}")
    cum = 0.0
    for v, p in zip(d.support, d.probs):
        cum += p
        if cum >= q - 1e-15:
            return v
    return d.support[-1]


# -- transforms -------------------------------------------------------------


def truncate_below(d: ValueDistribution, h: float, strict: bool = True) -> ValueDistribution:
    """Move all mass on values ``< h`` (``<= h`` if not strict) to an atom at 0."""
    if h < 0:
        raise ValueError("h must be >= 0")
    low = (lambda v: v < h) if strict else (lambda v: v <= h)
    zero = math.fsum(p for v, p in zip(d.support, d.probs) if low(v))
    kept = [(v, p) for v, p in zip(d.support, d.probs) if not low(v)]
    values = [0.0] + [v for v, _ in kept]
    probs = [zero] + [p for _, p in kept]
    return ValueDistribution.from_atoms(values, probs, d.label)


def middle_grid(L: float, H: float, step: float) -> np.ndarray:
    """Grid points ``L + j*step`` lying in ``[L, H)``."""
    m = max(1, math.ceil((H - L) / step - 1e-12))
    grid = L + step * np.arange(m, dtype=float)
    return grid[grid < H] if H > L else grid[:0]


def _round_middle(d: ValueDistribution, L: float, H: float, step: float) -> ValueDistribution:
    grid = middle_grid(L, H, step)
    values, probs = [], []
    for v, p in zip(d.support, d.probs):
        if v >= H:
            values.append(H)
        elif v < L:
            values.append(0.0)
        else:
            j = int(np.searchsorted(grid, v, side="right")) - 1
            values.append(float(grid[j]))
        probs.append(p)
    return ValueDistribution.from_atoms(values, probs, d.label)


def round_middle_values(d: ValueDistribution, L: float, H: float, step: float) -> ValueDistribution:
    """Round values in ``[L, H)`` down onto the grid ``L + j*step``.

    Values ``>= H`` collapse to ``H`` and values ``< L`` go to 0.
    """
    if not 0 <= L < H:
        raise ValueError("need 0 <= L < H")
    if step <= 0:
        raise ValueError("step must be positive")
    if step >= H - L:
        raise ValueError("degenerate grid: step >= H - L")
    return _round_middle(d, L, H, step)


def prob_units(p: float, gamma: float) -> int:
    """``floor(p / gamma)``, forgiving a float hair below an exact multiple."""
    return math.floor(p / gamma + 1e-9)


def round_probs_down(d: ValueDistribution, gamma: float) -> ValueDistribution:
    """Replace each nonzero atom's probability ``p`` by ``gamma*floor(p/gamma)``.

    The removed mass goes to the atom at value 0.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    values, probs = [], []
    for v, p in zip(d.support, d.probs):
        if v == 0.0:
            continue
        t = prob_units(p, gamma)
        if t > 0:
            values.append(v)
            probs.append(gamma * t)
    zero = 1.0 - math.fsum(probs)
    return ValueDistribution.from_atoms([0.0] + values, [max(zero, 0.0)] + probs, d.label)


def smooth_atoms(d: ValueDistribution, width: float, grid: int) -> ValueDistribution:
    """Spread each atom ``(v, p)`` over ``grid`` equal atoms on ``[v, v + width]``."""
    if width <= 0 or grid < 1:
        raise ValueError("need width > 0 and grid >= 1")
    if grid == 1:
        return d
    offsets = [width * k / (grid - 1) for k in range(grid)]
    values, probs = [], []
    for v, p in zip(d.support, d.probs):
        for off in offsets:
            values.append(v + off)
            probs.append(p / grid)
    return ValueDistribution.from_atoms(values, probs, d.label)


def mixture_support(dists: Sequence[ValueDistribution]) -> np.ndarray:
    """Sorted union of the supports."""
    return np.unique(np.concatenate([d.values_array for d in dists]))
