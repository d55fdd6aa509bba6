"""Structure of the affine root data: classes, lattices, pairings."""
from fractions import Fraction as F

import pytest

from affell.root_system import AffineRoot, build_root_datum, coupling_dict

RANK3_TYPES = ["A2~1", "C2~1", "G2~1", "A4~2", "D3~2", "D4~3"]
ALL_TYPES = ["A1~1", "A2~2"] + RANK3_TYPES


@pytest.mark.parametrize("label", ALL_TYPES)
def test_gram_symmetric_positive(label):
    d = build_root_datum(label)
    g = d.gram
    assert all(g[i][j] == g[j][i] for i in range(d.l) for j in range(d.l))
    # positive definite via leading principal minors
    import numpy as np

    m = np.array([[float(x) for x in row] for row in g])
    assert all(np.linalg.det(m[:k, :k]) > 0 for k in range(1, d.l + 1))


@pytest.mark.parametrize("label,count", [("A2~1", 3), ("C2~1", 4), ("G2~1", 6)])
def test_positive_root_counts(label, count):
    d = build_root_datum(label)
    assert len(d.pos_roots) == count


@pytest.mark.parametrize("label", ALL_TYPES)
def test_root_classes_partition(label):
    d = build_root_datum(label)
    for bar in d.pos_roots:
        key = d.class_of(bar)
        assert key in d.class_names
        assert d.gamma_of(bar) in (F(1), F(d.r))


def test_a2_2_basic_facts():
    d = build_root_datum("A2~2")
    assert d.l == 1
    assert d.is_a_even_twisted
    assert d.gram == ((F(4),),)
    assert d.weight_basis[0] == (F(1, 2),)
    assert sorted(d.class_keys) == [F(1), F(4)]


def test_a2_2_pair_table_slots():
    d = build_root_datum("A2~2")
    assert d.n_pairs_table(F(1)) == ((2, 1), (2, 2), (1, 1), (1, F(1, 2)))
    assert d.n_pairs_table(F(4)) == (
        (1, F(1, 2)),
        (1, 1),
        (F(1, 2), F(1, 2)),
        (F(1, 2), F(1, 4)),
    )


def test_dual_coxeter_number_weighted():
    d = build_root_datum("A2~2")
    mu = coupling_dict(d, {F(1): F(2, 5), F(4): F(3, 7)})
    assert d.h_vee_mu(mu) == F(44, 35)


@pytest.mark.parametrize("label", ALL_TYPES)
def test_unit_couplings_give_dual_coxeter_number(label):
    """With every coupling set to 1 the weighted sum is the plain dual
    Coxeter number: an integer."""
    d = build_root_datum(label)
    mu = coupling_dict(d, {k: F(1) for k in d.class_keys})
    h = d.h_vee_mu(mu)
    assert h.denominator == 1 and h >= 2


@pytest.mark.parametrize("label", ALL_TYPES)
def test_theta_is_a_positive_root(label):
    d = build_root_datum(label)
    assert d.theta in d.pos_roots


@pytest.mark.parametrize("label", ALL_TYPES)
def test_lattice_m_inside_p(label):
    d = build_root_datum(label)
    for b in d.lattice_M.basis:
        assert b in d.lattice_P


def test_simple_roots_round_trip():
    d = build_root_datum("C2~1")
    for i in range(d.l + 1):
        r = d.simple_root(i)
        assert isinstance(r, AffineRoot)
        if i > 0:
            assert r.c == 0
    assert d.simple_root(0).c != 0


def test_unknown_label_rejected():
    with pytest.raises(ValueError):
        build_root_datum("Z9~5")
