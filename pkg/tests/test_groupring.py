import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from etncheck.cyclotomic import CycNum
from etncheck.groupring import (
    Character,
    CyclicGroup,
    GaloisCompatibilityError,
    GroupRingElt,
    NonIntegralError,
    char_eval,
    char_eval_numeric,
    exact_inverse_dft,
    ideal_power_membership,
    inverse_dft,
    is_zp_unit,
)

from oracles import IdealLatticeOracle, brute_force_unit, lattice_contains, products_span_basis

G9 = CyclicGroup(3, 2)
G7 = CyclicGroup(7, 1)
G3 = CyclicGroup(3, 1)


def test_group_validation():
    with pytest.raises(ValueError):
        CyclicGroup(2, 1)
    with pytest.raises(ValueError):
        CyclicGroup(9, 1)
    assert CyclicGroup(5, 0).order == 1
    assert G9.subgroup_order(0) == 9
    assert G9.subgroup_order(2) == 1


def test_character_levels_and_kernels():
    # ker(chi_j) = H_t exactly when chi_j(sigma^(p^t)) = 1 first happens at t
    for j, level in [(0, 0), (3, 1), (6, 1), (1, 2), (2, 2), (4, 2)]:
        chi = Character(G9, j)
        assert chi.level == level
        assert chi.order == 3**level
    # kernel membership: chi(sigma^(p^t) - 1) = 0 iff t >= level
    for j in range(9):
        chi = Character(G9, j)
        for t in range(3):
            val = char_eval(GroupRingElt.sigma_power_minus_one(G9, t), chi)
            assert (not val) == (t >= chi.level)


def test_char_eval_examples():
    assert char_eval(GroupRingElt.sigma_power(G9, 1), Character(G9, 0)) == 1
    tr = GroupRingElt.trace_elt(G9, 0)
    for j in range(9):
        expected = 9 if j == 0 else 0
        assert char_eval(tr, Character(G9, j)) == expected
    # trace of the trivial subgroup is the identity
    assert GroupRingElt.trace_elt(G9, 2) == GroupRingElt.one(G9)


def test_character_contragredient_and_twist():
    chi = Character(G9, 2)
    assert chi.contragredient().index == 7
    assert chi.galois_twist(2).index == 4
    assert chi.galois_twist(5).level == chi.level
    with pytest.raises(ValueError):
        chi.galois_twist(3)
    # twisting the character matches the Galois action on its values
    x = GroupRingElt(G9, [1, 0, 2, -1, 0, 0, 3, 0, 0])
    assert char_eval(x, chi.galois_twist(2)) == char_eval(x, chi).galois(2)


def test_sigma_power_minus_one_values():
    for t in (0, 1):
        for j in (1, 3, 4):
            chi = Character(G9, j)
            got = char_eval(GroupRingElt.sigma_power_minus_one(G9, t), chi)
            expected = chi.value(3**t) - 1
            assert got == expected


def test_augmentation_and_involution():
    x = GroupRingElt(G9, [1, -2, 3, 0, 0, 1, 0, 0, 5])
    assert x.augmentation() == 8
    assert GroupRingElt.sigma_power(G9, 4).augmentation() == 1
    assert x.involution().involution() == x
    assert x.involution().coeffs[2] == x.coeffs[7]


def test_exact_dft_roundtrip_random():
    rng = random.Random(5)
    for group in (G3, G9, G7):
        for _ in range(10):
            x = GroupRingElt(group, [Fraction(rng.randint(-9, 9), rng.choice([1, 2, 5])) for _ in range(group.order)])
            vals = {j: char_eval(x, Character(group, j)) for j in range(group.order)}
            assert exact_inverse_dft(group, vals) == x


def test_exact_dft_rejects_inequivariant_values():
    vals = {j: char_eval(GroupRingElt.one(G9), Character(G9, j)) for j in range(9)}
    vals[1] = CycNum.root_of_unity(9)  # breaks the Galois orbit of slot 1
    with pytest.raises(GaloisCompatibilityError):
        exact_inverse_dft(G9, vals)


def test_numeric_dft_roundtrip():
    rng = random.Random(17)
    for group in (G9, G7):
        x = GroupRingElt(group, [rng.randint(-6, 6) for _ in range(group.order)])
        vals = {j: char_eval_numeric(x, Character(group, j), 160) for j in range(group.order)}
        rec = inverse_dft(group, vals, denom_bound=10**6, precision=160)
        assert rec.element == x
        assert rec.residual < mpmath.mpf(2) ** -80


def test_numeric_dft_constant_and_basis_vectors():
    group = G9
    ones = {j: char_eval_numeric(GroupRingElt.one(group), Character(group, j), 128) for j in range(9)}
    rec = inverse_dft(group, ones, precision=128)
    assert rec.element == GroupRingElt.one(group)
    assert rec.residual < mpmath.mpf(2) ** -60
    sigma = GroupRingElt.sigma_power(group, 1)
    vals = {j: char_eval_numeric(sigma, Character(group, j), 128) for j in range(9)}
    rec = inverse_dft(group, vals, precision=128)
    assert rec.element == sigma


def test_numeric_dft_reports_residual_not_error():
    # garbage values recognize to something, with a large residual reported
    vals = {j: char_eval_numeric(GroupRingElt.one(G3), Character(G3, j), 128) for j in range(3)}
    vals[1] = vals[1] + BigComplexLike(0.37)
    rec = inverse_dft(G3, vals, precision=128)
    assert rec.residual > mpmath.mpf("0.05")


def BigComplexLike(x):
    from etncheck.cyclotomic import BigComplex

    return BigComplex.from_decimals(str(x), "0", 128)


def test_unit_examples():
    assert is_zp_unit(GroupRingElt.one(G3) + GroupRingElt.sigma_power(G3, 1)).ok
    assert not is_zp_unit(GroupRingElt.trace_elt(G3, 0)).ok
    assert is_zp_unit(GroupRingElt.sigma_power(G3, 2)).ok
    bad = GroupRingElt(G3, [Fraction(1, 3), 0, 0])
    verdict = is_zp_unit(bad)
    assert not verdict.ok and verdict.witness["reason"] == "coefficient not p-integral"


def test_unit_vs_brute_force_random():
    rng = random.Random(23)
    for group in (G3, G9):
        for _ in range(120):
            coeffs = [
                Fraction(rng.randint(-8, 8), rng.choice([1, 1, 2, group.p]))
                for _ in range(group.order)
            ]
            x = GroupRingElt(group, coeffs)
            assert is_zp_unit(x).ok == brute_force_unit(x)


def test_ideal_membership_examples():
    s = GroupRingElt.sigma_power(G9, 1)
    one = GroupRingElt.one(G9)
    sq = (s - one) ** 2
    assert ideal_power_membership(sq, 2)
    assert not ideal_power_membership(sq, 3)
    assert ideal_power_membership(one, 0)
    assert not ideal_power_membership(one, 1)
    assert ideal_power_membership(GroupRingElt.zero(G9), 4)
    with pytest.raises(NonIntegralError):
        ideal_power_membership(GroupRingElt(G9, [Fraction(1, 3)] + [0] * 8), 1)


def test_published_element_membership():
    # the published interpolation element for the 389a1 data: in I^2, not I^3
    elt = GroupRingElt(G9, [0, -1, 2, -1, 0, 2, -2, -2, 2])
    assert ideal_power_membership(elt, 2)
    assert not ideal_power_membership(elt, 3)


def test_membership_vs_hnf_oracle_small_grid():
    # all coefficient vectors in a thin slice plus randomized vectors
    rng = random.Random(41)
    for group in (G3, G9):
        oracles = {h: IdealLatticeOracle(group, h) for h in range(5)}
        base = GroupRingElt.sigma_power(group, 1) - GroupRingElt.one(group)
        for _ in range(150):
            style = rng.random()
            if style < 0.4:
                x = GroupRingElt(group, [rng.randint(-5, 5) for _ in range(group.order)])
            else:
                k = rng.randint(0, 3)
                y = GroupRingElt(group, [rng.randint(-3, 3) for _ in range(group.order)])
                x = y
                for _ in range(k):
                    x = x * base
            for h in range(5):
                assert ideal_power_membership(x, h) == oracles[h].contains(x), (group, x.coeffs, h)


def test_principality_of_ideal_powers():
    # span of all h-fold products of (g - 1) equals the (sigma-1)^h lattice at p
    rng = random.Random(43)
    for group in (G3, G9):
        for h in (1, 2, 3):
            span = products_span_basis(group, h)
            oracle = IdealLatticeOracle(group, h)
            for _ in range(40):
                x = GroupRingElt(group, [rng.randint(-5, 5) for _ in range(group.order)])
                assert lattice_contains(span, x, group.p) == oracle.contains(x)


@given(st.lists(st.integers(-5, 5), min_size=9, max_size=9), st.integers(0, 4))
@settings(max_examples=80, deadline=None)
def test_membership_agrees_with_oracle_property(coeffs, h):
    x = GroupRingElt(G9, coeffs)
    assert ideal_power_membership(x, h) == IdealLatticeOracle(G9, h).contains(x)
