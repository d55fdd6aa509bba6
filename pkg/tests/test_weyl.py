"""Extended affine Weyl group mechanics: lengths, words, inversion sets."""
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from affell.root_system import build_root_datum
from affell.weyl import (
    ExtendedWeylElement,
    bfs_length_table,
    is_minuscule,
    quasi_minuscule_weight,
    reduced_word,
)

RANK3_TYPES = ["A2~1", "C2~1", "G2~1", "A4~2", "D3~2", "D4~3"]

# lengths of the translations by the negated fundamental weights
TRANSLATION_LENGTHS = {
    "A2~1": (2, 2),
    "C2~1": (3, 4),
    "G2~1": (6, 10),
    "A4~2": (6, 4),
    "D3~2": (4, 3),
    "D4~3": (10, 6),
}


@pytest.mark.parametrize("label", RANK3_TYPES)
def test_translation_lengths(label):
    d = build_root_datum(label)
    expect = TRANSLATION_LENGTHS[label]
    got = tuple(
        ExtendedWeylElement.translation(
            d, tuple(-x for x in d.weight_basis[i])
        ).length()
        for i in range(d.l)
    )
    assert got == expect


@pytest.mark.parametrize("label", RANK3_TYPES + ["A1~1", "A2~2"])
def test_reduced_word_round_trip(label):
    d = build_root_datum(label)
    for i in range(d.l):
        lam = tuple(-x for x in d.weight_basis[i])
        elem = ExtendedWeylElement.translation(d, lam)
        w = reduced_word(elem)
        assert w.element() == elem
        assert len(w.letters) == elem.length()
        assert len(w.inversion_sequence()) == elem.length()


@pytest.mark.parametrize("label", RANK3_TYPES)
def test_inversion_sequence_matches_inversion_set(label):
    d = build_root_datum(label)
    lam = tuple(-x for x in d.weight_basis[0])
    elem = ExtendedWeylElement.translation(d, lam)
    seq = reduced_word(elem).inversion_sequence()
    assert len(set(seq)) == len(seq)
    assert set(seq) == set(elem.inversion_set())


@pytest.mark.parametrize("label", RANK3_TYPES + ["A1~1", "A2~2"])
def test_quasi_minuscule_translation_factors(label):
    """Translation by the negated image of the highest coroot is the product
    of the finite reflection in theta and the affine simple reflection."""
    d = build_root_datum(label)
    nth, _ = quasi_minuscule_weight(d)
    lam = tuple(-x for x in nth)
    lhs = ExtendedWeylElement.translation(d, lam)
    from affell.root_system import AffineRoot

    r_theta = ExtendedWeylElement.reflection(d, AffineRoot(d.theta, F(0)))
    r_0 = ExtendedWeylElement.simple(d, 0)
    assert lhs == r_theta * r_0


@pytest.mark.parametrize("label,max_len", [("C2~1", 6), ("A2~2", 6), ("G2~1", 5)])
def test_bfs_lengths_agree(label, max_len):
    d = build_root_datum(label)
    table = bfs_length_table(d, max_len)
    assert table
    for elem, ln in table.items():
        assert elem.length() == ln
        assert len(reduced_word(elem).letters) == ln


def test_minuscule_classification():
    d = build_root_datum("A2~1")
    assert all(
        is_minuscule(d, tuple(-x for x in d.weight_basis[i])) for i in range(d.l)
    )
    d = build_root_datum("G2~1")
    assert not any(
        is_minuscule(d, tuple(-x for x in d.weight_basis[i])) for i in range(d.l)
    )


@settings(max_examples=40, deadline=None)
@given(
    label=st.sampled_from(RANK3_TYPES),
    coeffs=st.lists(st.integers(min_value=0, max_value=2), min_size=2, max_size=2),
)
def test_translation_additivity(label, coeffs):
    """t_lam t_nu = t_{lam+nu} for antidominant weight-lattice points."""
    d = build_root_datum(label)
    a = tuple(-coeffs[0] * x for x in d.weight_basis[0])
    b = tuple(-coeffs[1] * x for x in d.weight_basis[1])
    s = tuple(x + y for x, y in zip(a, b))
    assert ExtendedWeylElement.translation(d, a) * ExtendedWeylElement.translation(
        d, b
    ) == ExtendedWeylElement.translation(d, s)


@settings(max_examples=30, deadline=None)
@given(label=st.sampled_from(RANK3_TYPES), data=st.data())
def test_length_is_inversion_count(label, data):
    d = build_root_datum(label)
    letters = data.draw(
        st.lists(st.integers(min_value=0, max_value=d.l), min_size=0, max_size=6)
    )
    elem = ExtendedWeylElement.identity(d)
    for i in letters:
        elem = elem * ExtendedWeylElement.simple(d, i)
    assert elem.length() == len(elem.inversion_set())
