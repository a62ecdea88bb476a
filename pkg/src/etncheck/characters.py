"""Dirichlet-character model for F inside Q(zeta_q), Gauss sums and constants.

The base field is Q.  F is the degree-p^n subfield of Q(zeta_q) for a prime
q = 1 (mod p^n); the identification of Gal(F/Q) with the quotient of
(Z/q)^x is fixed by sending a chosen primitive root g mod q to the
distinguished generator sigma.  A group character chi_j then corresponds to
the Dirichlet character a = g^k -> zeta_{p^n}^(jk) mod q.

Gauss sums are computed both exactly, as elements of Q(zeta_{q p^t}) via the
classical sum  tau(chi) = sum_a chi(a) zeta_q^a,  and numerically at a
requested precision; the two must agree under the standard embedding
zeta_m -> exp(2 pi i / m), which makes the q-part and p-part land on
exp(2 pi i / q) and exp(2 pi i / p^t) simultaneously.

For a base field other than Q the module does not compute anything: modified
Gauss sums must then be supplied with the input data, and only the supplied
numeric values are carried through.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

import mpmath

from .cyclotomic import DEFAULT_PRECISION, BigComplex, CycNum, embed
from .groupring import Character, CyclicGroup

__all__ = [
    "RamifiedPlace",
    "AbelianFieldSetup",
    "GaussSumValue",
    "MissingDataError",
    "gauss_sum",
    "unramified_factor",
    "tau_star",
    "archimedean_constant",
    "smallest_primitive_root",
]


class MissingDataError(ValueError):
    """Required ramification/Frobenius data is absent from the setup."""


def _is_prime(m: int) -> bool:
    if m < 2:
        return False
    d = 2
    while d * d <= m:
        if m % d == 0:
            return False
        d += 1
    return True


def smallest_primitive_root(q: int) -> int:
    order = q - 1
    fac = []
    n = order
    d = 2
    while d * d <= n:
        if n % d == 0:
            fac.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        fac.append(n)
    for g in range(2, q):
        if all(pow(g, order // f, q) != 1 for f in fac):
            return g
    raise ValueError(f"{q} has no primitive root")


@dataclass(frozen=True)
class RamifiedPlace:
    """One place of the base field that ramifies in F.

    ``inertia_level`` t means the inertia group is H_t; ``frobenius_exponent``
    f gives the Frobenius sigma^f in G/H_t (only consulted for characters that
    are trivial on the inertia group, and may be None when no such nontrivial
    character exists).
    """

    label: str
    inertia_level: int
    frobenius_exponent: Optional[int] = None


@dataclass(frozen=True)
class AbelianFieldSetup:
    group: CyclicGroup
    conductor: Optional[int]  # prime q for F inside Q(zeta_q); None for general k
    primitive_root: Optional[int]
    ramified: tuple[RamifiedPlace, ...]
    n_real: int = 1
    n_complex: int = 0
    discriminant: int = 1
    dimension: int = 1
    supplied_tau_star: Optional[Mapping[int, BigComplex]] = field(default=None)

    def __post_init__(self):
        if self.conductor is not None:
            q = self.conductor
            if not _is_prime(q):
                raise ValueError(f"conductor {q} must be prime")
            if (q - 1) % self.group.order:
                raise ValueError(f"q = {q} is not 1 mod {self.group.order}")
            g = self.primitive_root
            if g is None:
                raise ValueError("a primitive root mod q must be fixed")
            if pow(g, q - 1, q) != 1 or any(
                pow(g, (q - 1) // f, q) == 1 for f in _prime_factors(q - 1)
            ):
                raise ValueError(f"{g} is not a primitive root mod {q}")

    @classmethod
    def rational_cyclotomic(
        cls,
        group: CyclicGroup,
        q: int,
        primitive_root: Optional[int] = None,
        dimension: int = 1,
    ) -> "AbelianFieldSetup":
        """Setup for k = Q,  F = degree-p^n subfield of Q(zeta_q).

        q is totally ramified in F/Q, so the inertia group at q is all of G
        (level 0) and q is the only ramified place.
        """
        g = primitive_root if primitive_root is not None else smallest_primitive_root(q)
        return cls(
            group=group,
            conductor=q,
            primitive_root=g,
            ramified=(RamifiedPlace(label=str(q), inertia_level=0, frobenius_exponent=0),),
            n_real=1,
            n_complex=0,
            discriminant=1,
            dimension=dimension,
        )


def _prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


@dataclass(frozen=True)
class GaussSumValue:
    """Exact and numeric renderings of one (modified) Gauss sum."""

    exact: Optional[CycNum]
    numeric: BigComplex


def gauss_sum(chi: Character, setup: AbelianFieldSetup, precision: int = DEFAULT_PRECISION) -> GaussSumValue:
    """Classical Gauss sum of the Dirichlet character attached to chi.

    tau(chi) = sum_{a mod q} chi(a) zeta_q^a, an exact element of
    Q(zeta_{q p^t}) for t the level of chi; the trivial character gives 1.
    """
    if setup.conductor is None:
        raise MissingDataError("Gauss sums can only be computed for k = Q; supply tau* values instead")
    if chi.index == 0:
        one = CycNum.one()
        return GaussSumValue(one, embed(one, 1, precision))
    q = setup.conductor
    g = setup.primitive_root
    t_order = chi.order  # p^t
    m = q * t_order
    jred = chi.reduced_index
    vec = [Fraction(0)] * m
    a = 1
    for k in range(q - 1):
        # chi(g^k) * zeta_q^(g^k) = zeta_m^(q*jred*k + p^t * g^k)
        expo = (q * ((jred * k) % t_order) + t_order * a) % m
        vec[expo] += 1
        a = (a * g) % q
    exact = CycNum(m, vec)
    with mpmath.workprec(precision + 16):
        total = mpmath.mpc(0)
        a = 1
        for k in range(q - 1):
            angle = mpmath.mpf(2) * ((jred * k) % t_order) / t_order + mpmath.mpf(2) * a / q
            total += mpmath.expjpi(angle)
            a = (a * g) % q
        numeric = BigComplex.from_mpc(total, precision)
    return GaussSumValue(exact, numeric)


def unramified_factor(chi: Character, setup: AbelianFieldSetup) -> CycNum:
    """Product over ramified places of the non-ramified characteristic.

    A place contributes -chi(Fr^(-1)) when chi is trivial on its inertia
    group and 1 otherwise.
    """
    out = CycNum.one(chi.order if chi.order > 1 else 1)
    for place in setup.ramified:
        if chi.is_trivial_on_level(place.inertia_level):
            if chi.index != 0 and place.frobenius_exponent is None:
                raise MissingDataError(
                    f"character {chi.index} is unramified at {place.label} but no Frobenius was supplied"
                )
            f = place.frobenius_exponent or 0
            out = out * (-chi.value(-f))
    return out


def tau_star(chi: Character, setup: AbelianFieldSetup, precision: int = DEFAULT_PRECISION) -> GaussSumValue:
    """Modified Gauss sum u(chi) * tau(chi)."""
    if setup.supplied_tau_star is not None:
        if chi.index not in setup.supplied_tau_star:
            raise MissingDataError(f"no supplied tau* value for character {chi.index}")
        return GaussSumValue(None, setup.supplied_tau_star[chi.index])
    base = gauss_sum(chi, setup, precision)
    u = unramified_factor(chi, setup)
    if u == 1:
        return base
    assert base.exact is not None
    exact = base.exact * u.lift(base.exact.m)
    return GaussSumValue(exact, embed(exact, 1, precision))


def archimedean_constant(setup: AbelianFieldSetup, precision: int = DEFAULT_PRECISION) -> BigComplex:
    """i^(number of complex places of k)."""
    k = setup.n_complex % 4
    re, im = [(1, 0), (0, 1), (-1, 0), (0, -1)][k]
    with mpmath.workprec(precision + 16):
        return BigComplex(mpmath.mpf(re), mpmath.mpf(im), precision)
