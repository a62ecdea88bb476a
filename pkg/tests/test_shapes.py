from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from etncheck.groupring import Character, CyclicGroup
from etncheck.shapes import (
    NotPermutationShapeError,
    PermutationShape,
    augmentation_height,
    character_multiplicity,
    deepest_nontrivial_level,
    predicted_valuation,
    ranks_from_shape,
    ranks_from_vanishing_orders,
    shape_from_ranks,
)


def test_ranks_from_shape_examples():
    G = CyclicGroup(3, 2)
    assert ranks_from_shape(PermutationShape(G, (1, 1, 0))) == (2, 4, 4)
    # trivial action: constant ranks
    assert ranks_from_shape(PermutationShape(G, (3, 0, 0))) == (3, 3, 3)
    # one free summand: ranks p^t
    assert ranks_from_shape(PermutationShape(G, (0, 0, 1))) == (1, 3, 9)


def test_shape_from_ranks_examples():
    G7 = CyclicGroup(7, 1)
    assert shape_from_ranks(G7, (1, 7)).multiplicities == (0, 1)
    G9 = CyclicGroup(3, 2)
    assert shape_from_ranks(G9, (2, 2, 2)).multiplicities == (2, 0, 0)
    assert shape_from_ranks(G9, (2, 4, 4)).multiplicities == (1, 1, 0)


def test_shape_rejections_carry_level():
    G9 = CyclicGroup(3, 2)
    with pytest.raises(NotPermutationShapeError) as exc:
        shape_from_ranks(G9, (1, 2, 4))
    assert exc.value.level == 1
    with pytest.raises(NotPermutationShapeError) as exc:
        shape_from_ranks(G9, (1, 3, 2))  # rank drops
    assert exc.value.level == 2
    with pytest.raises(NotPermutationShapeError) as exc:
        shape_from_ranks(G9, (1, 3, 21))  # tail exceeds head: negative m_1
    assert exc.value.level == 1


def test_roundtrip_grid():
    for p in (3, 5, 7):
        for n in range(4):
            G = CyclicGroup(p, n)
            for m in product(range(4), repeat=n + 1):
                shape = PermutationShape(G, m)
                assert shape_from_ranks(G, ranks_from_shape(shape)) == shape


@given(st.integers(0, 3), st.integers(0, 3), st.integers(0, 3))
@settings(max_examples=30, deadline=None)
def test_roundtrip_property(m0, m1, m2):
    G = CyclicGroup(5, 2)
    shape = PermutationShape(G, (m0, m1, m2))
    assert shape_from_ranks(G, ranks_from_shape(shape)) == shape


def test_predicted_valuation_examples():
    G9 = CyclicGroup(3, 2)
    sh = PermutationShape(G9, (2, 0, 0))
    faithful = Character(G9, 1)
    assert predicted_valuation(sh, faithful) == 2
    assert augmentation_height(sh) == 2
    assert predicted_valuation(sh, Character(G9, 0)) == 0  # empty sum
    sh2 = PermutationShape(G9, (1, 1, 0))
    assert predicted_valuation(sh2, faithful) == 1 + 3


def test_height_and_deepest_level():
    G9 = CyclicGroup(3, 2)
    assert deepest_nontrivial_level(PermutationShape(G9, (2, 0, 0))) == 0
    assert deepest_nontrivial_level(PermutationShape(G9, (1, 1, 0))) == 1
    assert deepest_nontrivial_level(PermutationShape(G9, (0, 0, 2))) is None
    assert augmentation_height(PermutationShape(G9, (0, 0, 2))) == 0
    free = PermutationShape(G9, (0, 0, 1))
    assert free.is_free()
    assert not PermutationShape(G9, (1, 0, 1)).is_free()


def test_character_multiplicity_consistency():
    # multiplicity sums reproduce the rank vector
    G = CyclicGroup(3, 2)
    shape = PermutationShape(G, (2, 1, 1))
    ranks = ranks_from_shape(shape)
    for t in range(3):
        total = sum(
            character_multiplicity(shape, Character(G, j))
            for j in range(9)
            if Character(G, j).level <= t
        )
        assert total == ranks[t]


def test_ranks_from_vanishing_orders():
    G = CyclicGroup(3, 2)
    orders = {0: 2, 3: 1, 6: 1, 1: 0, 2: 0, 4: 0, 5: 0, 7: 0, 8: 0}
    assert ranks_from_vanishing_orders(G, orders) == (2, 4, 4)
    with pytest.raises(ValueError):
        ranks_from_vanishing_orders(G, {0: 1})


def test_shape_validation():
    G = CyclicGroup(3, 2)
    with pytest.raises(ValueError):
        PermutationShape(G, (1, 1))
    with pytest.raises(ValueError):
        PermutationShape(G, (1, -1, 0))
