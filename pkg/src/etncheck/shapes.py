"""Permutation-module combinatorics for Mordell-Weil groups.

A *shape* records the multiplicities (m_0, ..., m_n) in a decomposition of
the p-completed point group as a direct sum of modules Z_p[G/H_t]^(m_t).
Ranks over the tower of fixed fields determine the shape by a triangular
system, and the shape in turn determines the invariants the verification
criteria consume:

* the rank vector r_t = rank over the fixed field of H_t,
* the predicted valuation b(chi) = sum_{s < level(chi)} p^s m_s,
* the augmentation height h = sum_{t < n} m_t,
* the deepest level t0 < n with m_t0 != 0 (if any).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .groupring import Character, CyclicGroup

__all__ = [
    "PermutationShape",
    "NotPermutationShapeError",
    "ranks_from_shape",
    "shape_from_ranks",
    "ranks_from_vanishing_orders",
    "predicted_valuation",
    "augmentation_height",
    "deepest_nontrivial_level",
    "character_multiplicity",
]


class NotPermutationShapeError(ValueError):
    """The rank vector is inconsistent with a permutation-module decomposition."""

    def __init__(self, level: int, detail: str):
        self.level = level
        super().__init__(f"not a permutation shape at level {level}: {detail}")


@dataclass(frozen=True)
class PermutationShape:
    group: CyclicGroup
    multiplicities: tuple[int, ...]

    def __post_init__(self):
        if len(self.multiplicities) != self.group.n + 1:
            raise ValueError("need one multiplicity per subgroup level")
        if any(m < 0 or not isinstance(m, int) for m in self.multiplicities):
            raise ValueError("multiplicities must be nonnegative integers")

    def __getitem__(self, t: int) -> int:
        return self.multiplicities[t]

    def is_free(self) -> bool:
        """All points at the bottom level: the module is Z_p[G]^(m_n)."""
        return all(m == 0 for m in self.multiplicities[:-1])


def ranks_from_shape(shape: PermutationShape) -> tuple[int, ...]:
    """r_t = sum_{s<t} p^s m_s + p^t sum_{s>=t} m_s."""
    p = shape.group.p
    out = []
    for t in range(shape.group.n + 1):
        r = sum(p**s * shape[s] for s in range(t))
        r += p**t * sum(shape[s] for s in range(t, shape.group.n + 1))
        out.append(r)
    return tuple(out)


def shape_from_ranks(group: CyclicGroup, ranks: Sequence[int]) -> PermutationShape:
    """Invert the triangular rank system; reject inconsistent data.

    With S_t := sum_{s>=t} m_s one has S_0 = r_0 and
    S_{t+1} = (r_{t+1} - r_t) / (p^{t+1} - p^t); every S must be a
    nonnegative integer and weakly decreasing.
    """
    if len(ranks) != group.n + 1:
        raise ValueError(f"need {group.n + 1} ranks, got {len(ranks)}")
    p = group.p
    tails = [int(ranks[0])]
    if ranks[0] < 0:
        raise NotPermutationShapeError(0, f"negative rank {ranks[0]}")
    for t in range(1, group.n + 1):
        diff = ranks[t] - ranks[t - 1]
        denom = p**t - p ** (t - 1)
        if diff < 0:
            raise NotPermutationShapeError(t, f"rank drops from {ranks[t-1]} to {ranks[t]}")
        if diff % denom:
            raise NotPermutationShapeError(t, f"rank increment {diff} not divisible by {denom}")
        tails.append(diff // denom)
    mults = []
    for t in range(group.n):
        m = tails[t] - tails[t + 1]
        if m < 0:
            raise NotPermutationShapeError(t, f"negative multiplicity {m}")
        mults.append(m)
    mults.append(tails[group.n])
    return PermutationShape(group, tuple(mults))


def ranks_from_vanishing_orders(group: CyclicGroup, orders: Mapping[int, int]) -> tuple[int, ...]:
    """Rank vector predicted by orders of vanishing: r_t = sum over chi with
    level(chi) <= t of the order at chi."""
    if set(orders.keys()) != set(range(group.order)):
        raise ValueError("orders must be given for all characters")
    out = []
    for t in range(group.n + 1):
        out.append(sum(r for j, r in orders.items() if Character(group, j).level <= t))
    return tuple(out)


def character_multiplicity(shape: PermutationShape, chi: Character) -> int:
    """Multiplicity of chi in the complexified module: sum_{t >= level} m_t."""
    return sum(shape[t] for t in range(chi.level, shape.group.n + 1))


def predicted_valuation(shape: PermutationShape, chi: Character) -> int:
    """b(chi) = sum_{s < level(chi)} p^s m_s."""
    p = shape.group.p
    return sum(p**s * shape[s] for s in range(chi.level))


def augmentation_height(shape: PermutationShape) -> int:
    """h = sum_{t < n} m_t."""
    return sum(shape.multiplicities[: shape.group.n])


def deepest_nontrivial_level(shape: PermutationShape) -> Optional[int]:
    """Largest t < n with m_t != 0, or None when the module is free."""
    for t in range(shape.group.n - 1, -1, -1):
        if shape[t]:
            return t
    return None
