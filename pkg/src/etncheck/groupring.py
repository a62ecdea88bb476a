"""Exact arithmetic in Q[G] for a cyclic group G of odd prime-power order.

G = <sigma> of order p^n.  Elements are coefficient vectors indexed by powers
of sigma; multiplication is cyclic convolution.  The subgroup lattice is the
chain H_0 > H_1 > ... > H_n with |H_t| = p^(n-t) and H_t = <sigma^(p^t)>.

Characters are indexed by j in {0, ..., p^n - 1} with chi_j(sigma) =
zeta_{p^n}^j.  The *level* of chi_j is the unique t with ker(chi_j) = H_t;
equivalently chi_j has order p^t.

Besides the ring structure this module provides the two integral tests that
drive the verification criteria:

* ``is_zp_unit`` -- membership in Z_p[G]^x.  Z_p[G] is local (G is a p-group),
  so x is a unit iff every coefficient is p-integral and the augmentation is
  a p-adic unit.
* ``ideal_power_membership`` -- membership in I^h where I is the augmentation
  ideal of Z_p[G].  I is principal on sigma - 1, so the test divides h times,
  fixing the one free trace coefficient at each step by the augmentation
  condition.

All p-adic conditions are exact statements about rationals; no p-adic floats
appear anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple

import mpmath

from .cyclotomic import (
    DEFAULT_PRECISION,
    BigComplex,
    CycNum,
    Scalar,
    _as_fraction,
    _vp,
    mpf_to_fraction,
)

__all__ = [
    "CyclicGroup",
    "GroupRingElt",
    "Character",
    "characters",
    "char_eval",
    "char_eval_numeric",
    "exact_inverse_dft",
    "inverse_dft",
    "RecognizedElement",
    "UnitVerdict",
    "is_zp_unit",
    "ideal_power_membership",
    "GaloisCompatibilityError",
    "NonIntegralError",
]


class GaloisCompatibilityError(ValueError):
    """Character values are not Galois-equivariant, so no rational element fits."""


class NonIntegralError(ValueError):
    """Operation requires p-integral coefficients."""


@dataclass(frozen=True)
class CyclicGroup:
    """Cyclic Galois group of order p^n with a distinguished generator sigma."""

    p: int
    n: int

    def __post_init__(self):
        if self.p < 3 or self.p % 2 == 0:
            raise ValueError("p must be an odd prime")
        if any(self.p % d == 0 for d in range(3, int(self.p**0.5) + 1, 2)):
            raise ValueError(f"{self.p} is not prime")
        if self.n < 0:
            raise ValueError("n must be nonnegative")

    @property
    def order(self) -> int:
        return self.p**self.n

    def subgroup_order(self, t: int) -> int:
        """|H_t| = p^(n-t)."""
        if not 0 <= t <= self.n:
            raise ValueError(f"level {t} out of range 0..{self.n}")
        return self.p ** (self.n - t)

    def levels(self) -> range:
        return range(self.n + 1)


class GroupRingElt:
    """Exact element of Q[G]; coefficient of sigma^i at index i."""

    __slots__ = ("group", "coeffs")

    def __init__(self, group: CyclicGroup, coeffs: Iterable[Scalar]):
        self.group = group
        self.coeffs = tuple(_as_fraction(c) for c in coeffs)
        if len(self.coeffs) != group.order:
            raise ValueError("coefficient vector has wrong length")

    # -- constructors ---------------------------------------------------

    @classmethod
    def zero(cls, group: CyclicGroup) -> "GroupRingElt":
        return cls(group, [0] * group.order)

    @classmethod
    def one(cls, group: CyclicGroup) -> "GroupRingElt":
        return cls.sigma_power(group, 0)

    @classmethod
    def sigma_power(cls, group: CyclicGroup, i: int) -> "GroupRingElt":
        vec = [Fraction(0)] * group.order
        vec[i % group.order] = Fraction(1)
        return cls(group, vec)

    @classmethod
    def trace_elt(cls, group: CyclicGroup, t: int) -> "GroupRingElt":
        """Tr_{H_t} = sum of the elements of H_t = <sigma^(p^t)>."""
        size = group.subgroup_order(t)
        step = group.p**t
        vec = [Fraction(0)] * group.order
        for k in range(size):
            vec[(k * step) % group.order] = Fraction(1)
        return cls(group, vec)

    @classmethod
    def idempotent_times_order(cls, group: CyclicGroup, t: int) -> "GroupRingElt":
        # |H_t| * e_{H_t}; kept integral so callers choose where to divide.
        return cls.trace_elt(group, t)

    @classmethod
    def sigma_power_minus_one(cls, group: CyclicGroup, t: int) -> "GroupRingElt":
        return cls.sigma_power(group, group.p**t) - cls.one(group)

    # -- ring operations --------------------------------------------------

    def _check(self, other: "GroupRingElt"):
        if self.group != other.group:
            raise ValueError("group mismatch")

    def __add__(self, other):
        if isinstance(other, GroupRingElt):
            self._check(other)
            return GroupRingElt(self.group, [a + b for a, b in zip(self.coeffs, other.coeffs)])
        vec = list(self.coeffs)
        vec[0] += _as_fraction(other)
        return GroupRingElt(self.group, vec)

    __radd__ = __add__

    def __neg__(self):
        return GroupRingElt(self.group, [-a for a in self.coeffs])

    def __sub__(self, other):
        return self + (-other if isinstance(other, GroupRingElt) else -_as_fraction(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, GroupRingElt):
            self._check(other)
            order = self.group.order
            out = [Fraction(0)] * order
            for i, a in enumerate(self.coeffs):
                if a:
                    for j, b in enumerate(other.coeffs):
                        if b:
                            out[(i + j) % order] += a * b
            return GroupRingElt(self.group, out)
        q = _as_fraction(other)
        return GroupRingElt(self.group, [q * a for a in self.coeffs])

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative powers not supported; invert explicitly")
        out = GroupRingElt.one(self.group)
        base = self
        while e:
            if e & 1:
                out = out * base
            e >>= 1
            if e:
                base = base * base
        return out

    def __eq__(self, other):
        if not isinstance(other, GroupRingElt):
            return NotImplemented
        return self.group == other.group and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.group, self.coeffs))

    def __repr__(self):
        terms = []
        for i, c in enumerate(self.coeffs):
            if c:
                terms.append(str(c) if i == 0 else (f"{c}*s" if i == 1 else f"{c}*s^{i}"))
        return " + ".join(terms) if terms else "0"

    # -- structure maps ----------------------------------------------------

    def augmentation(self) -> Fraction:
        return sum(self.coeffs, Fraction(0))

    def involution(self) -> "GroupRingElt":
        """Image under sigma -> sigma^(-1)."""
        order = self.group.order
        return GroupRingElt(self.group, [self.coeffs[(-i) % order] for i in range(order)])

    def is_p_integral(self) -> bool:
        p = self.group.p
        return all(c.denominator % p for c in self.coeffs)


@dataclass(frozen=True)
class Character:
    """chi_j on G, with chi_j(sigma) = zeta_{p^n}^j."""

    group: CyclicGroup
    index: int

    def __post_init__(self):
        object.__setattr__(self, "index", self.index % self.group.order)

    @property
    def level(self) -> int:
        """The t with ker(chi) = H_t; chi has order p^t."""
        if self.index == 0:
            return 0
        j, t = self.index, self.group.n
        while j % self.group.p == 0:
            j //= self.group.p
            t -= 1
        return t

    @property
    def order(self) -> int:
        return self.group.p**self.level

    @property
    def reduced_index(self) -> int:
        """j' with chi(sigma) = zeta_{p^level}^(j'), gcd(j', p) = 1 unless trivial."""
        return self.index // (self.group.p ** (self.group.n - self.level))

    def value(self, i: int = 1) -> CycNum:
        """chi(sigma^i), exactly, in the minimal field Q(zeta_{p^level})."""
        order = self.order
        if order == 1:
            return CycNum.one()
        return CycNum.root_of_unity(order, (i * self.reduced_index) % order)

    def contragredient(self) -> "Character":
        return Character(self.group, -self.index)

    def galois_twist(self, s: int) -> "Character":
        """chi^gamma for gamma: zeta -> zeta^s."""
        if math.gcd(s, self.group.p) != 1:
            raise ValueError("twist exponent must be prime to p")
        return Character(self.group, (self.index * s) % self.group.order)

    def is_trivial_on_level(self, t: int) -> bool:
        """Whether chi restricted to H_t is trivial, i.e. level <= t."""
        return self.level <= t


def characters(group: CyclicGroup) -> list[Character]:
    return [Character(group, j) for j in range(group.order)]


def char_eval(x: GroupRingElt, chi: Character) -> CycNum:
    """sum_i x_i * chi(sigma^i), reduced into Q(zeta_{p^level})."""
    if chi.group != x.group:
        raise ValueError("group mismatch")
    order = chi.order
    if order == 1:
        return CycNum.rational(x.augmentation())
    jred = chi.reduced_index
    vec = [Fraction(0)] * order
    for i, c in enumerate(x.coeffs):
        if c:
            vec[(i * jred) % order] += c
    return CycNum(order, vec)


def _root_table(order: int, precision: int) -> list[mpmath.mpc]:
    with mpmath.workprec(precision + 16):
        return [mpmath.expjpi(mpmath.mpf(2 * k) / order) for k in range(order)]


def char_eval_numeric(x: GroupRingElt, chi: Character, precision: int = DEFAULT_PRECISION) -> BigComplex:
    order = x.group.order
    roots = _root_table(order, precision)
    with mpmath.workprec(precision + 16):
        total = mpmath.mpc(0)
        for i, c in enumerate(x.coeffs):
            if c:
                total += (mpmath.mpf(c.numerator) / c.denominator) * roots[(i * chi.index) % order]
        return BigComplex.from_mpc(total, precision)


# ---------------------------------------------------------------------------
# Fourier transforms between Q[G] and character values.
# ---------------------------------------------------------------------------


def exact_inverse_dft(group: CyclicGroup, values: Mapping[int, CycNum]) -> GroupRingElt:
    """Reconstruct the exact element of Q[G] with the given character values.

    ``values[j]`` is chi_j(x) as an exact cyclotomic number (any conductor
    dividing p^n).  Raises GaloisCompatibilityError when the coefficients do
    not come out rational, which is exactly failure of equivariance.
    """
    order = group.order
    if set(values.keys()) != set(range(order)):
        raise ValueError("values must be given for all characters")
    if order == 1:
        v = values[0]
        if not v.is_rational():
            raise GaloisCompatibilityError("trivial group: the single value must be rational")
        return GroupRingElt(group, [v.as_rational()])
    lifted = {j: v.lift(order) for j, v in values.items()}
    coeffs = []
    for i in range(order):
        acc = CycNum.zero(order) if order > 1 else CycNum.zero()
        for j, v in lifted.items():
            if order > 1:
                acc = acc + v * CycNum.root_of_unity(order, (-i * j) % order)
            else:
                acc = acc + v
        if not acc.is_rational():
            raise GaloisCompatibilityError(
                f"coefficient of sigma^{i} is not rational; character values are not equivariant"
            )
        coeffs.append(acc.as_rational() / order)
    return GroupRingElt(group, coeffs)


class RecognizedElement(NamedTuple):
    element: GroupRingElt
    residual: mpmath.mpf
    per_character: dict[int, mpmath.mpf]


def inverse_dft(
    group: CyclicGroup,
    values: Mapping[int, BigComplex],
    denom_bound: int = 10**6,
    precision: int = DEFAULT_PRECISION,
) -> RecognizedElement:
    """Numeric inverse DFT with rational rounding.

    Computes candidate coefficients (1/|G|) sum_chi values(chi) conj(chi(sigma^i)),
    rounds each to the nearest rational with denominator <= denom_bound, and
    reports the max residual |value - recognized| over all characters.  The
    caller decides acceptance; a large residual is verdict data, not an error.
    """
    order = group.order
    if set(values.keys()) != set(range(order)):
        raise ValueError("values must be given for all characters")
    roots = _root_table(order, precision)
    with mpmath.workprec(precision + 16):
        zs = {j: v.to_mpc() for j, v in values.items()}
        coeffs = []
        for i in range(order):
            acc = mpmath.mpc(0)
            for j, z in zs.items():
                acc += z * roots[(-i * j) % order]
            coeffs.append(mpf_to_fraction(acc.real / order).limit_denominator(denom_bound))
        elt = GroupRingElt(group, coeffs)
        per: dict[int, mpmath.mpf] = {}
        for j in range(order):
            back = mpmath.mpc(0)
            for i, c in enumerate(elt.coeffs):
                if c:
                    back += (mpmath.mpf(c.numerator) / c.denominator) * roots[(i * j) % order]
            per[j] = abs(zs[j] - back)
        residual = max(per.values())
    return RecognizedElement(elt, residual, per)


# ---------------------------------------------------------------------------
# Integral criteria in Z_p[G].
# ---------------------------------------------------------------------------


class UnitVerdict(NamedTuple):
    ok: bool
    witness: dict


def is_zp_unit(x: GroupRingElt) -> UnitVerdict:
    """Unit test in Z_p[G] (local ring: integral coefficients + unit augmentation)."""
    p = x.group.p
    for i, c in enumerate(x.coeffs):
        if _vp(c, p) < 0:
            return UnitVerdict(False, {"reason": "coefficient not p-integral", "index": i, "coefficient": c})
    aug = x.augmentation()
    v = _vp(aug, p)
    if v != 0:
        return UnitVerdict(False, {"reason": "augmentation not a p-unit", "augmentation": aug, "valuation": v})
    return UnitVerdict(True, {"augmentation": aug, "augmentation_valuation": 0})


def _divide_by_sigma_minus_one(x: GroupRingElt) -> GroupRingElt:
    # Particular solution of (sigma - 1) y = x, valid when aug(x) = 0; the
    # choice y_{N-1} = 0 makes every y_i a partial sum of x's coefficients.
    order = x.group.order
    y = [Fraction(0)] * order
    acc = Fraction(0)
    for i in range(order - 1, 0, -1):
        acc += x.coeffs[i]
        y[i - 1] = acc
    return GroupRingElt(x.group, y)


def ideal_power_membership(x: GroupRingElt, h: int) -> bool:
    """Whether x lies in I^h, I = ker(augmentation) of Z_p[G] = (sigma-1) Z_p[G].

    Decided by exact division: solve x = (sigma-1)^h y over Q and check that a
    solution exists with all denominators coprime to p.  After each division
    the solution is unique up to a trace multiple, and the augmentation
    condition pins that multiple down.
    """
    if h < 0:
        raise ValueError("h must be nonnegative")
    p = x.group.p
    if not x.is_p_integral():
        raise NonIntegralError("ideal membership requires p-integral coefficients")
    cur = x
    for step in range(h):
        if cur.augmentation() != 0:
            return False
        y = _divide_by_sigma_minus_one(cur)
        if step == h - 1:
            return True
        # y + c*Tr_G must land in I^(h-step-1); augmentation forces c.
        c = -y.augmentation() / x.group.order
        if _vp(c, p) < 0:
            return False
        cur = y + c * GroupRingElt.trace_elt(x.group, 0)
    return True
