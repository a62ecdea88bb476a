"""Exact arithmetic in cyclotomic fields Q(zeta_m), plus high-precision embeddings.

An element is stored by its coordinates on the power basis
1, zeta, ..., zeta^(phi(m)-1), reduced modulo the m-th cyclotomic polynomial,
with exact rational coefficients.  Every operation returns the unique reduced
representative, so equality is coefficient equality.

The module also provides:

* ``valuation_above_p`` -- the normalized valuation at the unique prime above
  p of Q(zeta_{p^k}), with v(1 - zeta_{p^k}) = 1 and v(p) = phi(p^k),
* ``embed`` -- numeric evaluation at a chosen primitive m-th root of unity,
* ``BigComplex`` -- a small arbitrary-precision complex carrier on top of
  mpmath that keeps track of its working precision.

Valuations are only supported for prime-power conductors (and for plain
rationals); that is the only case the verification criteria need, and it keeps
every p-adic condition an exact statement about rationals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence, Union

import mpmath
import numpy as np

DEFAULT_PRECISION = 192  # bits; enough for 30-digit published data plus guard
_GUARD_BITS = 32

Scalar = Union[int, Fraction]

__all__ = [
    "CycNum",
    "BigComplex",
    "ModulusMismatchError",
    "cyclotomic_polynomial",
    "euler_phi",
    "valuation_above_p",
    "embed",
    "mpf_to_fraction",
    "decimal_to_fraction",
    "recognize_rational",
    "DEFAULT_PRECISION",
]


class ModulusMismatchError(ValueError):
    """Raised when combining elements of distinct cyclotomic fields."""


def _factorize(m: int) -> dict[int, int]:
    out: dict[int, int] = {}
    d = 2
    while d * d <= m:
        while m % d == 0:
            out[d] = out.get(d, 0) + 1
            m //= d
        d += 1
    if m > 1:
        out[m] = out.get(m, 0) + 1
    return out


def euler_phi(m: int) -> int:
    phi = 1
    for q, e in _factorize(m).items():
        phi *= (q - 1) * q ** (e - 1)
    return phi


def _mobius(m: int) -> int:
    fac = _factorize(m)
    if any(e > 1 for e in fac.values()):
        return 0
    return -1 if len(fac) % 2 else 1


def _divisors(m: int) -> list[int]:
    divs = [1]
    for q, e in _factorize(m).items():
        divs = [d * q**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def _poly_mul_int(a: Sequence[int], b: Sequence[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return out


def _poly_div_exact_int(num: Sequence[int], den: Sequence[int]) -> list[int]:
    # Exact division of integer polynomials; den must be monic up to sign.
    num = list(num)
    dn = len(den) - 1
    lead = den[-1]
    q = [0] * (len(num) - dn)
    for k in range(len(num) - 1, dn - 1, -1):
        c = num[k]
        if c % lead:
            raise ArithmeticError("division is not exact")
        c //= lead
        q[k - dn] = c
        if c:
            for j, dj in enumerate(den):
                num[k - dn + j] -= c * dj
    if any(num[:dn]):
        raise ArithmeticError("division is not exact")
    return q


@lru_cache(maxsize=None)
def cyclotomic_polynomial(m: int) -> tuple[int, ...]:
    """Coefficients (constant first) of Phi_m, via prod (x^d - 1)^{mu(m/d)}."""
    if m < 1:
        raise ValueError("modulus must be positive")
    num: list[int] = [1]
    den: list[int] = [1]
    for d in _divisors(m):
        mu = _mobius(m // d)
        if mu == 0:
            continue
        factor = [-1] + [0] * (d - 1) + [1]  # x^d - 1
        if mu == 1:
            num = _poly_mul_int(num, factor)
        else:
            den = _poly_mul_int(den, factor)
    return tuple(_poly_div_exact_int(num, den))


@lru_cache(maxsize=None)
def _reduction_rows(m: int) -> tuple[tuple[int, ...], ...]:
    # Row k holds the coefficients of x^(phi+k) mod Phi_m, for k = 0..m-2.
    phi_poly = cyclotomic_polynomial(m)
    deg = len(phi_poly) - 1
    rows: list[tuple[int, ...]] = []
    cur = [-c for c in phi_poly[:deg]]  # x^deg mod Phi_m
    for _ in range(m - 1):
        rows.append(tuple(cur))
        top = cur[-1]
        cur = [0] + cur[:-1]
        if top:
            for i in range(deg):
                cur[i] -= top * phi_poly[i]
        cur = cur[:deg]
    return tuple(rows)


def _reduce_coeffs(m: int, coeffs: Sequence[Fraction]) -> tuple[Fraction, ...]:
    deg = euler_phi(m)
    out = list(coeffs[:deg]) + [Fraction(0)] * max(0, deg - len(coeffs))
    if len(coeffs) > deg:
        rows = _reduction_rows(m)
        for k in range(deg, len(coeffs)):
            c = coeffs[k]
            if c:
                row = rows[k - deg]
                for i, ri in enumerate(row):
                    if ri:
                        out[i] += c * ri
    return tuple(out)


def _as_fraction(x: Scalar) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


class CycNum:
    """An exact element of Q(zeta_m) in reduced power-basis form."""

    __slots__ = ("m", "coeffs")

    def __init__(self, m: int, coeffs: Iterable[Scalar], *, reduce: bool = True):
        self.m = int(m)
        vec = [_as_fraction(c) for c in coeffs]
        if reduce:
            self.coeffs = _reduce_coeffs(self.m, vec)
        else:
            self.coeffs = tuple(vec)
        if len(self.coeffs) != euler_phi(self.m):
            raise ValueError("coefficient vector has wrong length")

    # -- constructors -------------------------------------------------

    @classmethod
    def rational(cls, value: Scalar, m: int = 1) -> "CycNum":
        deg = euler_phi(m)
        return cls(m, [_as_fraction(value)] + [Fraction(0)] * (deg - 1), reduce=False)

    @classmethod
    def root_of_unity(cls, m: int, k: int = 1) -> "CycNum":
        k %= m
        vec = [Fraction(0)] * (k + 1)
        vec[k] = Fraction(1)
        return cls(m, vec)

    @classmethod
    def zero(cls, m: int = 1) -> "CycNum":
        return cls.rational(0, m)

    @classmethod
    def one(cls, m: int = 1) -> "CycNum":
        return cls.rational(1, m)

    # -- coercion helpers ----------------------------------------------

    def _coerce(self, other) -> "CycNum":
        if isinstance(other, CycNum):
            if other.m == self.m:
                return other
            if other.m == 1:
                return CycNum.rational(other.coeffs[0], self.m)
            if self.m == 1:
                raise _PromoteLeft(other)
            raise ModulusMismatchError(
                f"cannot combine Q(zeta_{self.m}) with Q(zeta_{other.m})"
            )
        return CycNum.rational(_as_fraction(other), self.m)

    # -- ring operations -----------------------------------------------

    def __add__(self, other):
        try:
            o = self._coerce(other)
        except _PromoteLeft as pl:
            return pl.elt + self
        return CycNum(self.m, [a + b for a, b in zip(self.coeffs, o.coeffs)], reduce=False)

    __radd__ = __add__

    def __neg__(self):
        return CycNum(self.m, [-a for a in self.coeffs], reduce=False)

    def __sub__(self, other):
        return self + (-other if isinstance(other, CycNum) else -_as_fraction(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            o = self._coerce(other)
        except _PromoteLeft as pl:
            return pl.elt * self
        if o.is_rational():
            q = o.coeffs[0]
            return CycNum(self.m, [a * q for a in self.coeffs], reduce=False)
        if self.is_rational():
            q = self.coeffs[0]
            return CycNum(self.m, [q * b for b in o.coeffs], reduce=False)
        prod = [Fraction(0)] * (2 * len(self.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(o.coeffs):
                    if b:
                        prod[i + j] += a * b
        return CycNum(self.m, prod)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        out = CycNum.one(self.m)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base if e > 1 else base
            e >>= 1
        return out

    def __truediv__(self, other):
        o = self._coerce(other) if not isinstance(other, CycNum) else other
        if isinstance(o, CycNum) and o.m != self.m and o.m != 1 and self.m != 1:
            raise ModulusMismatchError(
                f"cannot combine Q(zeta_{self.m}) with Q(zeta_{other.m})"
            )
        return self * (o.inverse() if isinstance(o, CycNum) else CycNum.rational(o).inverse())

    def __bool__(self):
        return any(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and self.coeffs[0] == other
        if not isinstance(other, CycNum):
            return NotImplemented
        if self.m == other.m:
            return self.coeffs == other.coeffs
        if self.is_rational() and other.is_rational():
            return self.coeffs[0] == other.coeffs[0]
        return False

    def __hash__(self):
        if self.is_rational():
            return hash(self.coeffs[0])
        return hash((self.m, self.coeffs))

    def __repr__(self):
        terms = []
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            if i == 0:
                terms.append(str(c))
            elif i == 1:
                terms.append(f"{c}*z{self.m}")
            else:
                terms.append(f"{c}*z{self.m}^{i}")
        return " + ".join(terms) if terms else "0"

    # -- field structure -------------------------------------------------

    def inverse(self) -> "CycNum":
        if not self:
            raise ZeroDivisionError("inverse of zero cyclotomic element")
        if self.is_rational():
            return CycNum.rational(1 / self.coeffs[0], self.m)
        phi_poly = [Fraction(c) for c in cyclotomic_polynomial(self.m)]
        u = _poly_inverse_mod(list(self.coeffs), phi_poly)
        return CycNum(self.m, u)

    def galois(self, s: int) -> "CycNum":
        """Image under zeta -> zeta^s; s must be a unit modulo m."""
        s %= self.m
        if math.gcd(s, self.m) != 1:
            raise ValueError(f"{s} is not invertible modulo {self.m}")
        vec = [Fraction(0)] * self.m
        for i, c in enumerate(self.coeffs):
            if c:
                vec[(i * s) % self.m] += c
        return CycNum(self.m, vec)

    def conjugate(self) -> "CycNum":
        if self.m == 1:
            return self
        return self.galois(self.m - 1)

    def lift(self, big_m: int) -> "CycNum":
        """Embed into Q(zeta_M) for m | M via zeta_m = zeta_M^(M/m)."""
        if big_m % self.m:
            raise ModulusMismatchError(f"{self.m} does not divide {big_m}")
        if big_m == self.m:
            return self
        step = big_m // self.m
        vec = [Fraction(0)] * big_m
        for i, c in enumerate(self.coeffs):
            if c:
                vec[i * step] += c
        return CycNum(big_m, vec)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def as_rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self!r} is not rational")
        return self.coeffs[0]

    def norm(self) -> Fraction:
        """Field norm to Q, as the product of all Galois conjugates."""
        out = CycNum.one(self.m)
        for s in range(1, self.m + 1):
            if math.gcd(s, self.m) == 1:
                out = out * self.galois(s)
        return out.as_rational()


class _PromoteLeft(Exception):
    def __init__(self, elt: CycNum):
        self.elt = elt


def _poly_inverse_mod(a: list[Fraction], mod: list[Fraction]) -> list[Fraction]:
    # Extended Euclid in Q[x]: returns u with a*u = 1 (mod `mod`).
    def degree(p):
        for i in range(len(p) - 1, -1, -1):
            if p[i]:
                return i
        return -1

    def trim(p):
        d = degree(p)
        return p[: d + 1] if d >= 0 else []

    r0, r1 = trim(list(mod)), trim(list(a))
    s0, s1 = [Fraction(0)], [Fraction(1)]
    while degree(r1) > 0:
        d0, d1 = degree(r0), degree(r1)
        q = [Fraction(0)] * (d0 - d1 + 1)
        rem = list(r0)
        for k in range(d0, d1 - 1, -1):
            c = rem[k] / r1[d1]
            q[k - d1] = c
            if c:
                for j in range(d1 + 1):
                    rem[k - d1 + j] -= c * r1[j]
        rem = trim(rem)
        s_new = list(s0) + [Fraction(0)] * max(0, len(q) + len(s1) - 1 - len(s0))
        for i, qi in enumerate(q):
            if qi:
                for j, sj in enumerate(s1):
                    s_new[i + j] -= qi * sj
        r0, r1 = r1, rem if rem else [Fraction(0)]
        s0, s1 = s1, trim(s_new) if trim(s_new) else [Fraction(0)]
    if degree(r1) != 0:
        raise ZeroDivisionError("element is not invertible")
    c = r1[0]
    return [si / c for si in s1]


# ---------------------------------------------------------------------------
# Valuation above p for prime-power conductors.
# ---------------------------------------------------------------------------


def _vp(q: Fraction | int, p: int):
    if q == 0:
        return math.inf
    q = _as_fraction(q)
    v = 0
    n = q.numerator
    while n % p == 0:
        n //= p
        v += 1
    d = q.denominator
    while d % p == 0:
        d //= p
        v -= 1
    return v


@lru_cache(maxsize=None)
def _pascal_mod(deg: int, p: int) -> np.ndarray:
    # M[k, i] = (-1)^k * binom(i, k) mod p: the matrix of a(zeta) -> a(1 - pi).
    mat = np.zeros((deg, deg), dtype=np.int64)
    row = [1] + [0] * (deg - 1)
    for i in range(deg):
        for k, c in enumerate(row):
            if c:
                mat[k, i] = c if k % 2 == 0 else (p - c) % p
        row = [(row[k] + (row[k - 1] if k else 0)) % p for k in range(deg)]
    return mat


def _is_p_power(m: int, p: int) -> bool:
    while m % p == 0:
        m //= p
    return m == 1


def valuation_above_p(a: CycNum, p: int):
    """Normalized valuation of ``a`` at the prime above p of Q(zeta_{p^k}).

    Requires the conductor of ``a`` to be 1 or a power of p (totally ramified
    case, residue degree one).  Returns ``math.inf`` for a = 0.  Normalized so
    that v(1 - zeta_{p^k}) = 1 and v(p) = phi(p^k).
    """
    if p < 2:
        raise ValueError("p must be a prime")
    if a.m != 1 and not _is_p_power(a.m, p):
        raise ValueError(f"conductor {a.m} is not a power of {p}")
    if not a:
        return math.inf
    if a.m == 1:
        return _vp(a.coeffs[0], p)
    deg = len(a.coeffs)
    # Strip the rational content so the remaining vector is primitive over Z.
    num_gcd = math.gcd(*(c.numerator for c in a.coeffs))
    den_lcm = 1
    for c in a.coeffs:
        den_lcm = den_lcm * c.denominator // math.gcd(den_lcm, c.denominator)
    content = Fraction(num_gcd, den_lcm)
    prim = [int(c / content) for c in a.coeffs]
    # Expand the primitive part in powers of pi = 1 - zeta, modulo p.  The
    # pi-power coordinates have pairwise distinct valuations, so the first
    # index with a unit coordinate is the valuation; primitivity guarantees
    # such an index exists.
    vec = np.array([c % p for c in prim], dtype=np.int64)
    expansion = _pascal_mod(deg, p) @ vec % p
    nonzero = np.nonzero(expansion)[0]
    if nonzero.size == 0:
        raise ArithmeticError("primitive vector reduced to zero mod p")
    return deg * _vp(content, p) + int(nonzero[0])


# ---------------------------------------------------------------------------
# Arbitrary-precision complex values.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BigComplex:
    """A complex number carried at an explicit binary precision (>= 64 bits)."""

    re: mpmath.mpf
    im: mpmath.mpf
    precision: int

    def __post_init__(self):
        if self.precision < 64:
            raise ValueError("precision must be at least 64 bits")

    @classmethod
    def from_decimals(cls, re: str, im: str = "0", precision: int = DEFAULT_PRECISION) -> "BigComplex":
        with mpmath.workprec(precision + _GUARD_BITS):
            return cls(mpmath.mpf(re), mpmath.mpf(im), precision)

    @classmethod
    def from_mpc(cls, z, precision: int) -> "BigComplex":
        # conversion must not round into the ambient (possibly 53-bit) context
        with mpmath.workprec(precision + _GUARD_BITS):
            return cls(mpmath.mpf(z.real), mpmath.mpf(z.imag), precision)

    def to_mpc(self):
        return mpmath.mpc(self.re, self.im)

    def _binary(self, other, fn) -> "BigComplex":
        prec = max(self.precision, other.precision) if isinstance(other, BigComplex) else self.precision
        with mpmath.workprec(prec + _GUARD_BITS):
            if isinstance(other, BigComplex):
                zo = other.to_mpc()
            elif isinstance(other, Fraction):
                zo = mpmath.mpc(mpmath.mpf(other.numerator) / other.denominator)
            else:
                zo = mpmath.mpc(other)
            z = fn(self.to_mpc(), zo)
            return BigComplex(mpmath.mpf(z.real), mpmath.mpf(z.imag), prec)

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._binary(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binary(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binary(other, lambda a, b: a / b)

    def __rtruediv__(self, other):
        return self._binary(other, lambda a, b: b / a)

    def __neg__(self):
        # fneg(exact=True) avoids rounding into the ambient context
        return BigComplex(mpmath.fneg(self.re, exact=True), mpmath.fneg(self.im, exact=True), self.precision)

    def conjugate(self) -> "BigComplex":
        return BigComplex(self.re, mpmath.fneg(self.im, exact=True), self.precision)

    def abs(self) -> mpmath.mpf:
        with mpmath.workprec(self.precision + _GUARD_BITS):
            return mpmath.sqrt(self.re**2 + self.im**2)

    def __repr__(self):
        return f"BigComplex({mpmath.nstr(self.re, 20)}, {mpmath.nstr(self.im, 20)}, prec={self.precision})"


def embed(a: CycNum, root_index: int = 1, precision: int = DEFAULT_PRECISION) -> BigComplex:
    """Evaluate ``a`` at zeta_m = exp(2*pi*i*root_index/m).

    Each power of the root is synthesized directly from its reduced angle, so
    rounding does not accumulate across the degree; the result is computed
    with guard bits and is accurate to well below 2^(1-precision) relative
    for the coefficient sizes the recognizers accept.
    """
    if math.gcd(root_index, a.m) != 1:
        raise ValueError(f"root index {root_index} not coprime to {a.m}")
    with mpmath.workprec(precision + _GUARD_BITS):
        total = mpmath.mpc(0)
        for i, c in enumerate(a.coeffs):
            if c:
                angle = mpmath.mpf(2 * ((i * root_index) % a.m)) / a.m
                term = mpmath.expjpi(angle)
                total += mpmath.mpf(c.numerator) / c.denominator * term
        return BigComplex(mpmath.mpf(total.real), mpmath.mpf(total.imag), precision)


# ---------------------------------------------------------------------------
# Numeric-to-exact recognition helpers.
# ---------------------------------------------------------------------------


def mpf_to_fraction(x) -> Fraction:
    x = mpmath.mpf(x)
    if not mpmath.isfinite(x):
        raise ValueError("cannot convert non-finite value to a fraction")
    sign, man, exp, _ = x._mpf_
    if man == 0:
        return Fraction(0)
    value = Fraction(int(man)) * Fraction(2) ** exp
    return -value if sign else value


def decimal_to_fraction(s: str) -> Fraction:
    """Exact value of a decimal string (fixtures store decimals as text)."""
    return Fraction(s.strip())


def recognize_rational(x, denom_bound: int) -> Fraction:
    """Closest rational with denominator <= denom_bound (continued fractions)."""
    return mpf_to_fraction(x).limit_denominator(denom_bound)
