"""Difference-reflection operators: composition, closed forms, oracles."""
import itertools
from fractions import Fraction as F

import numpy as np
import pytest

from affell import operators as O
from affell.root_system import AffineRoot, build_root_datum, coupling_dict
from affell.weyl import ExtendedWeylElement, is_minuscule, quasi_minuscule_weight

TAU = 0.8j + 0.05
RANK3_TYPES = ["A2~1", "C2~1", "G2~1", "A4~2", "D3~2", "D4~3"]


def generic_context(label, zeta=O.BASIC, kappa=F(3, 7)):
    d = build_root_datum(label)
    mu = {k: F(2 + i, 5 + 2 * i) for i, k in enumerate(sorted(d.class_keys))}
    xi = tuple(F(2 * n + 1, 9 + 2 * n) for n in range(d.l))
    return d, O.make_context(d, TAU, mu, xi, kappa=kappa, zeta=zeta)


def invariant_context(label, level=1):
    d = build_root_datum(label)
    mu = {k: F(2 + i, 5 + 2 * i) for i, k in enumerate(sorted(d.class_keys))}
    mud = coupling_dict(d, mu)
    xi = tuple(-x for x in d.rho_mu(mud))
    return d, O.make_context(d, TAU, mu, xi, kappa=d.h_vee_mu(mud) / level)


def sample_points(rng, d, n=5):
    return rng.normal(size=(n, d.l)) * 0.3 + 1j * rng.normal(size=(n, d.l)) * 0.11


def coeff_gap(c1, c2):
    err, scale = 0.0, 1e-300
    for g in set(c1) | set(c2):
        a, b = np.asarray(c1.get(g, 0.0)), np.asarray(c2.get(g, 0.0))
        err = max(err, float(np.max(np.abs(a - b))))
        scale = max(scale, float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    return err / scale


def test_zeta_dict_shapes():
    d = build_root_datum("A2~2")
    zd = O.zeta_dict(d, O.BASIC)
    assert set(zd) == set(d.class_keys)
    for key, tup in zd.items():
        assert len(tup) == 4
        # the basic choice selects exactly one slot
        assert sum(1 for z in tup if z != 0) == 1


def test_zeta_dict_accepts_class_names():
    d = build_root_datum("C2~1")
    zd = O.zeta_dict(d, {d.class_names[k]: (1.0, 0.5, 0.0, 0.0) for k in d.class_keys})
    for k in d.class_keys:
        slots = d.n_pairs_table(k)
        assert all(
            z == (0.5 if s is not None else 0.0)
            for z, s in zip(zd[k][1:2], slots[1:2])
        )


@pytest.mark.parametrize("label", RANK3_TYPES)
def test_unitarity_scalar(label):
    rng = np.random.default_rng(11)
    d, ctx = generic_context(label)
    ys = sample_points(rng, d)
    ident = ExtendedWeylElement.identity(d)
    bars = [d.pos_roots[0], d.pos_roots[-1]]
    for bar in bars:
        root = AffineRoot(bar, F(0))
        neg = AffineRoot(tuple(-x for x in bar), F(0))
        co = (O.r_matrix(d, root) * O.r_matrix(d, neg)).collect(ys, ctx)
        u = O.unitarity_scalar(ctx, bar)
        assert np.max(np.abs(co[ident] - u)) < 1e-9 * max(1.0, abs(u))
        for g, c in co.items():
            if g != ident:
                assert np.max(np.abs(c)) < 1e-9 * max(1.0, abs(u))


def test_unitarity_vanishes_on_coupling_line():
    """At <xi, alpha^vee> = mu_alpha the two-step product annihilates."""
    rng = np.random.default_rng(12)
    d = build_root_datum("C2~1")
    mu = {k: F(2 + i, 5 + 2 * i) for i, k in enumerate(sorted(d.class_keys))}
    bar = d.pos_roots[0]
    key = d.class_of(bar)
    # scale a fundamental weight so that <xi, alpha^vee> = mu_alpha exactly
    i = next(j for j in range(d.l) if d.simple_root(j + 1).bar == bar)
    base = d.weight_basis[i]
    p = 2 * d.pair(base, bar) / d.sq_len(bar)
    xi = tuple(mu[key] / p * x for x in base)
    ctx = O.make_context(d, TAU, mu, xi, kappa=F(3, 7))
    op = O.r_matrix(d, AffineRoot(bar, F(0))) * O.r_matrix(
        d, AffineRoot(tuple(-x for x in bar), F(0))
    )
    ys = sample_points(rng, d)
    co = op.collect(ys, ctx)
    scale = max(
        float(np.max(np.abs(c)))
        for c in O.r_matrix(d, AffineRoot(bar, F(0))).collect(ys, ctx).values()
    )
    for c in co.values():
        assert np.max(np.abs(c)) < 1e-8 * scale


@pytest.mark.parametrize("label", ["A2~1", "C2~1", "A4~2"])
def test_product_law_and_commutativity(label):
    rng = np.random.default_rng(13)
    d, ctx = generic_context(label)
    l1 = tuple(-x for x in d.weight_basis[0])
    l2 = tuple(-x for x in d.weight_basis[1])
    y1, y2 = O.y_operator(d, l1), O.y_operator(d, l2)
    y12 = O.y_operator(d, tuple(a + b for a, b in zip(l1, l2)))
    ys = sample_points(rng, d, 4)
    cab = (y1 * y2).collect(ys, ctx)
    assert coeff_gap(cab, (y2 * y1).collect(ys, ctx)) < 1e-8
    assert coeff_gap(cab, y12.collect(ys, ctx)) < 1e-8


@pytest.mark.parametrize("label", ["A2~1", "A3~1", "D3~2"])
def test_minuscule_closed_form(label):
    rng = np.random.default_rng(14)
    d, _ = generic_context(label)
    _, ctx = invariant_context(label)
    from affell.weyl import finite_weyl_group

    v = rng.normal(size=d.l) + 0.3j * rng.normal(size=d.l)
    gram = ctx.gram_f
    mats = [np.array([[float(x) for x in r] for r in w]) for w in finite_weyl_group(d)]
    f = lambda ys: sum(np.exp(np.atleast_2d(ys) @ w.T @ gram @ v) for w in mats)
    ys = sample_points(rng, d)
    done = 0
    for i in range(d.l):
        lam = tuple(-x for x in d.weight_basis[i])
        if not is_minuscule(d, lam):
            continue
        a = O.y_operator(d, lam).apply(f, ys, ctx)
        b = O.minuscule_closed_form(d, lam).apply(f, ys, ctx)
        assert np.max(np.abs(a - b)) < 1e-9 * np.max(np.abs(a))
        done += 1
    assert done > 0


@pytest.mark.parametrize("label", RANK3_TYPES)
def test_quasi_minuscule_closed_form(label):
    rng = np.random.default_rng(15)
    d, ctx = invariant_context(label)
    from affell.weyl import finite_weyl_group

    v = rng.normal(size=d.l) + 0.3j * rng.normal(size=d.l)
    gram = ctx.gram_f
    mats = [np.array([[float(x) for x in r] for r in w]) for w in finite_weyl_group(d)]
    f = lambda ys: sum(np.exp(np.atleast_2d(ys) @ w.T @ gram @ v) for w in mats)
    ys = sample_points(rng, d)
    nth, _ = quasi_minuscule_weight(d)
    a = O.y_operator(d, tuple(-x for x in nth)).apply(f, ys, ctx)
    b = O.quasi_minuscule_closed_form(d).apply(f, ys, ctx)
    assert np.max(np.abs(a - b)) < 1e-9 * np.max(np.abs(a))


@pytest.mark.parametrize("label", ["A2~1", "C2~1", "D3~2"])
def test_bar_representation_conjugation(label):
    rng = np.random.default_rng(16)
    d, ctx = generic_context(label)
    mu = {k: F(2 + i, 5 + 2 * i) for i, k in enumerate(sorted(d.class_keys))}
    xi = tuple(F(2 * n + 1, 9 + 2 * n) for n in range(d.l))
    lam = tuple(-x for x in d.weight_basis[0])
    ybar = O.bar_y_operator(d, lam, mu, xi)
    Xi = O.capital_xi(d, mu, xi)
    conj = (
        O.translation_operator(d, tuple(-x for x in Xi))
        * O.y_operator(d, lam)
        * O.translation_operator(d, Xi)
    )
    ys = sample_points(rng, d, 3)
    assert coeff_gap(ybar.collect(ys, ctx), conj.collect(ys, ctx)) < 1e-9


def test_bar_representation_collapse_at_invariant_line():
    rng = np.random.default_rng(17)
    d, ctx = invariant_context("C2~1")
    mu = {k: F(2 + i, 5 + 2 * i) for i, k in enumerate(sorted(d.class_keys))}
    mud = coupling_dict(d, mu)
    xi = tuple(-x for x in d.rho_mu(mud))
    lam = tuple(-x for x in d.weight_basis[0])
    ybar = O.bar_y_operator(d, lam, mu, xi)
    ys = sample_points(rng, d, 3)
    assert coeff_gap(ybar.collect(ys, ctx), O.y_operator(d, lam).collect(ys, ctx)) < 1e-9


def test_leading_term_coefficient():
    rng = np.random.default_rng(18)
    d, ctx = generic_context("C2~1")
    lam = tuple(-x for x in d.weight_basis[0])
    ys = sample_points(rng, d)
    co = O.y_operator(d, lam).collect(ys, ctx)
    lead = co[ExtendedWeylElement.translation(d, lam)]
    ref = O.leading_term_coefficient(ctx, lam)(ys)
    assert np.max(np.abs(lead - ref)) < 1e-9 * np.max(np.abs(ref))


def test_weighted_inversion_sum_identity():
    """The coupling-weighted sum over the inversion set recovers the weight
    itself, exactly in rational arithmetic, for 100 random pairs."""
    rng = np.random.default_rng(19)
    labels = RANK3_TYPES + ["A1~1", "A2~2"]
    checked = 0
    while checked < 100:
        d = build_root_datum(labels[rng.integers(len(labels))])
        mu = {
            k: F(int(rng.integers(1, 7)), int(rng.integers(1, 7)))
            for k in d.class_keys
        }
        coeffs = [int(c) for c in rng.integers(0, 3, size=d.l)]
        if not any(coeffs):
            continue
        lam = tuple(
            sum(-c * w[i] for c, w in zip(coeffs, d.weight_basis))
            for i in range(d.l)
        )
        assert O.weighted_inversion_sum(d, lam, mu) == tuple(lam)
        checked += 1


def x_coordinates(d, ys):
    """Partial-sum coordinates for the type-A dictionary, last entry zero."""
    l = d.l + 1
    za = ys @ np.array([[float(x) for x in row] for row in d.gram])
    xs = np.zeros((ys.shape[0], l), dtype=complex)
    for i in range(l - 2, -1, -1):
        xs[:, i] = xs[:, i + 1] + za[:, i]
    return xs


@pytest.mark.parametrize("l", [2, 3])
def test_a_type_oracle_matches(l):
    """The classical l-variable operator agrees with the composed operator
    under mu_p = -mu tau, kappa_p = -kappa tau on symmetric functions."""
    rng = np.random.default_rng(9)
    d = build_root_datum(f"A{l-1}~1")
    mu = {k: F(2, 5) for k in d.class_keys}
    mud = coupling_dict(d, mu)
    xi = tuple(-x for x in d.rho_mu(mud))
    kappa = F(3, 7)
    ctx = O.make_context(d, TAU, mu, xi, kappa=kappa)
    lam = tuple(-x for x in d.weight_basis[0])
    v = rng.normal(size=l) + 0.2j * rng.normal(size=l)
    v -= v.mean()

    def fx(xs):
        return sum(np.exp(xs[:, p] @ v) for p in itertools.permutations(range(l)))

    def fy(ys):
        return fx(x_coordinates(d, np.atleast_2d(ys)))

    ys = sample_points(rng, d)
    mine = O.y_operator(d, lam).apply(fy, ys, ctx)
    oracle = O.a_type_difference_op(l, -float(F(2, 5)) * TAU, -float(kappa) * TAU, TAU)
    theirs = oracle(fx, x_coordinates(d, ys))
    assert np.max(np.abs(mine - theirs)) < 1e-9 * np.max(np.abs(theirs))


def test_bc_type_difference_op_const_symmetric():
    """The one-variable eight-parameter operator commutes with x -> -x."""
    from affell.theta import SeriesConfig

    cfg = SeriesConfig(im_tau_floor=0.05)
    rng = np.random.default_rng(20)
    nus = rng.normal(size=4) * 0.1 + 1j * rng.normal(size=4) * 0.1
    nubs = rng.normal(size=4) * 0.1 + 1j * rng.normal(size=4) * 0.1
    op = O.bc_type_difference_op(1, -0.31 + 0.22j, nus, nubs, 0.2 - 0.5j, TAU, cfg)
    xs = (rng.normal(size=6) * 0.3 + 1j * (0.05 + 0.2 * rng.random(6))).reshape(-1, 1)
    f = lambda X: np.cos(2 * np.pi * X[:, 0])  # even test function
    assert np.max(np.abs(op(f, xs) - op(f, -xs))) < 1e-9 * np.max(np.abs(op(f, xs)))
