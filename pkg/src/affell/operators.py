"""Elliptic difference-reflection operators attached to an affine root datum.

The central object is a lazy product of *factors*, each of which is a short
sum of terms ``coefficient x group element``.  An elementary reflection
factor attached to a real root ``alpha`` is

    R_alpha = H_alpha(mu_alpha) * Id - H_alpha(<xi, alpha^vee>) * r_alpha,

with ``H_alpha`` a ratio of theta functions, and the commuting difference
operators ``Y^lam`` (for antidominant ``lam`` in the translation lattice)
are products of such factors along the inversion sequence of a reduced word
for ``t_lam``, followed by the translation itself.

Products are never expanded symbolically.  ``collect`` evaluates a product
at a batch of sample points, multiplying factor by factor and merging terms
on equal group elements, so the number of live terms stays bounded by the
number of distinct group elements actually reachable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .exact import Vec, vec, vec_add, vec_scale, vec_sub, zero_vec
from .root_system import AffineRoot, AffineRootDatum, coupling_dict
from .theta import DEFAULT_SERIES, SeriesConfig, jacobi_theta, theta1_guarded
from .weyl import ExtendedWeylElement, reduced_word

F = Fraction

#: slot weights selecting the plain ``(m, n) = (1, 1)`` table entry per class
BASIC = "basic"


def _basic_zeta(datum: AffineRootDatum, key: Fraction) -> tuple[complex, ...]:
    slots = datum.n_pairs_table(key)
    return tuple(
        1.0 if s is not None and s == (F(1), F(1)) else 0.0 for s in slots
    )


def zeta_dict(datum: AffineRootDatum, zeta) -> dict[Fraction, tuple[complex, ...]]:
    """Normalise slot weights: ``"basic"`` picks the plain ``(1,1)`` slot in
    every class; a mapping may be keyed by class name or squared length and
    gives a 4-tuple per class (weights of absent slots are forced to zero)."""
    out = {}
    for key in datum.class_keys:
        name = datum.class_names[key]
        if zeta == BASIC:
            raw = _basic_zeta(datum, key)
        elif isinstance(zeta, dict):
            raw = zeta.get(key, zeta.get(name))
            if raw is None:
                raise ValueError(f"no slot weights given for class {name!r}")
        else:
            raise ValueError("zeta must be 'basic' or a mapping per class")
        slots = datum.n_pairs_table(key)
        out[key] = tuple(
            complex(z) if s is not None else 0.0
            for z, s in zip(raw, slots, strict=True)
        )
    return out


@dataclass(frozen=True)
class EvalContext:
    """Everything needed to turn a symbolic factor product into numbers."""

    datum: AffineRootDatum
    tau: complex
    kappa: Fraction
    mu: dict[Fraction, Fraction]
    zeta: dict[Fraction, tuple[complex, ...]]
    xi: Vec
    cfg: SeriesConfig = field(default_factory=SeriesConfig)

    @property
    def gram_f(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.datum.gram])


def make_context(
    datum: AffineRootDatum,
    tau: complex,
    mu,
    xi,
    kappa=None,
    level: int | None = None,
    zeta=BASIC,
    cfg: SeriesConfig = DEFAULT_SERIES,
) -> EvalContext:
    """Build an :class:`EvalContext`.  The translation step ``kappa`` may be
    given directly or derived from a theta ``level`` as ``h^vee_mu / level``."""
    mud = coupling_dict(datum, mu)
    if kappa is None:
        if level is None:
            raise ValueError("give either kappa or level")
        kappa = datum.h_vee_mu(mud) / level
    return EvalContext(
        datum=datum,
        tau=complex(tau),
        kappa=Fraction(kappa),
        mu=mud,
        zeta=zeta_dict(datum, zeta),
        xi=vec(xi),
        cfg=cfg,
    )


# ---------------------------------------------------------------------------
# coefficient functions
# ---------------------------------------------------------------------------


def xi_coroot_pairing(ctx: EvalContext, bar: Vec) -> Fraction:
    """``<xi, alpha^vee> = 2 (xi | bar) / (bar | bar)`` (delta-part drops out)."""
    d = ctx.datum
    return 2 * d.pair(ctx.xi, bar) / d.sq_len(bar)


def h_coefficient(ctx: EvalContext, root: AffineRoot, nu) -> "np.ndarray":
    """Return a callable ``ys -> H_alpha(nu)(ys)`` for sample points ``ys``
    of shape ``(npts, l)`` in simple-root coordinates.

    Per table slot ``(m, n)`` with weight ``zeta_j``:

        zeta_j * th1(n g mu t / m) th1(m z + n g nu t / m)
               / (th1(m z) th1(n g nu t / m))        all at nome ``n g tau``,

    where ``z = (bar | y) - kappa c tau`` and ``g = gamma_alpha``.
    """
    d = ctx.datum
    bar = root.bar
    key = d.class_of(bar)
    g = d.gamma_of(bar)
    mu_a = ctx.mu[key]
    zetas = ctx.zeta[key]
    slots = d.n_pairs_table(key)
    tau = ctx.tau
    gbar = ctx.gram_f @ np.array([float(x) for x in bar])
    zoff = -float(ctx.kappa * root.c) * tau
    nuv = complex(nu)

    def fn(ys: np.ndarray) -> np.ndarray:
        z = ys @ gbar + zoff
        total = np.zeros(ys.shape[0], dtype=complex)
        for zj, slot in zip(zetas, slots, strict=True):
            if slot is None or zj == 0:
                continue
            m, n = slot
            ng = float(n * g)
            w = ng * tau / float(m)
            num = jacobi_theta(1, w * float(mu_a), ng * tau, ctx.cfg) * jacobi_theta(
                1, float(m) * z + w * nuv, ng * tau, ctx.cfg
            )
            den = theta1_guarded(float(m) * z, ng * tau, ctx.cfg) * theta1_guarded(
                w * nuv, ng * tau, ctx.cfg
            )
            total += zj * num / den
        return total

    return fn


# ---------------------------------------------------------------------------
# operators as factor products
# ---------------------------------------------------------------------------


def point_action(ctx: EvalContext, g: ExtendedWeylElement, ys: np.ndarray) -> np.ndarray:
    """Transformed sample points: for a term carrying group element
    ``g = w t_lam``, downstream coefficients are evaluated at
    ``w^{-1} y - kappa tau lam``."""
    winv = np.array([[float(x) for x in row] for row in g.inverse_matrix()])
    lam = np.array([float(x) for x in g.shift])
    return ys @ winv.T + float(ctx.kappa) * ctx.tau * lam


class Factor:
    """One multiplicand: a short list of ``(coefficient, group element)``."""

    def terms(self, ctx: EvalContext):
        raise NotImplementedError


@dataclass(frozen=True)
class RFactor(Factor):
    root: AffineRoot

    def terms(self, ctx: EvalContext):
        d = ctx.datum
        key = d.class_of(self.root.bar)
        ident = ExtendedWeylElement.identity(d)
        refl = ExtendedWeylElement.reflection(d, self.root)
        h_id = h_coefficient(ctx, self.root, ctx.mu[key])
        h_rf = h_coefficient(ctx, self.root, xi_coroot_pairing(ctx, self.root.bar))
        return [(h_id, ident), (lambda ys, f=h_rf: -f(ys), refl)]


@dataclass(frozen=True)
class GroupFactor(Factor):
    elem: ExtendedWeylElement

    def terms(self, ctx: EvalContext):
        return [(None, self.elem)]


@dataclass(frozen=True)
class TermListFactor(Factor):
    """An already-expanded sum of coefficient x group terms (closed forms)."""

    build: object  # callable ctx -> list[(coeff fn | None, elem)]

    def terms(self, ctx: EvalContext):
        return self.build(ctx)


class DifferenceReflectionOperator:
    """A formal product of factors, evaluated lazily at sample points."""

    def __init__(self, datum: AffineRootDatum, factors):
        self.datum = datum
        self.factors = tuple(factors)

    def __mul__(self, other: "DifferenceReflectionOperator") -> "DifferenceReflectionOperator":
        if self.datum is not other.datum:
            raise ValueError("operators live on different root data")
        return DifferenceReflectionOperator(self.datum, self.factors + other.factors)

    def collect(self, ys, ctx: EvalContext) -> dict[ExtendedWeylElement, np.ndarray]:
        """Expand the product at sample points ``ys`` of shape ``(npts, l)``:
        a map from group elements to coefficient arrays."""
        ys = np.atleast_2d(np.asarray(ys, dtype=complex))
        ident = ExtendedWeylElement.identity(self.datum)
        state = {ident: np.ones(ys.shape[0], dtype=complex)}
        pts = {ident: ys}
        for factor in self.factors:
            terms = factor.terms(ctx)
            new: dict[ExtendedWeylElement, np.ndarray] = {}
            for g, carr in state.items():
                yg = pts[g]
                for fn, gj in terms:
                    c = carr if fn is None else carr * fn(yg)
                    key = g * gj
                    if key in new:
                        new[key] = new[key] + c
                    else:
                        new[key] = c
            state = new
            pts = {g: point_action(ctx, g, ys) for g in state}
        return state

    def apply(self, f, ys, ctx: EvalContext) -> np.ndarray:
        """Evaluate ``(O f)(ys)`` for a callable ``f : (npts, l) -> (npts,)``."""
        ys = np.atleast_2d(np.asarray(ys, dtype=complex))
        coeffs = self.collect(ys, ctx)
        out = np.zeros(ys.shape[0], dtype=complex)
        for g, c in coeffs.items():
            out += c * np.asarray(f(point_action(ctx, g, ys)))
        return out

    def describe(self) -> list[str]:
        out = []
        for f in self.factors:
            if isinstance(f, RFactor):
                out.append(f"R[{f.root}]")
            elif isinstance(f, GroupFactor):
                out.append(f"g[{f.elem}]")
            else:
                out.append("terms[...]")
        return out


def r_matrix(datum: AffineRootDatum, root: AffineRoot) -> DifferenceReflectionOperator:
    return DifferenceReflectionOperator(datum, [RFactor(root)])


def group_operator(datum: AffineRootDatum, elem: ExtendedWeylElement) -> DifferenceReflectionOperator:
    return DifferenceReflectionOperator(datum, [GroupFactor(elem)])


def translation_operator(datum: AffineRootDatum, lam) -> DifferenceReflectionOperator:
    return group_operator(datum, ExtendedWeylElement.translation(datum, vec(lam)))


def y_operator(datum: AffineRootDatum, lam) -> DifferenceReflectionOperator:
    """``Y^lam`` for antidominant ``lam``: reflection factors along the
    inversion sequence of a reduced word for ``t_lam``, then ``t_lam``."""
    lam = vec(lam)
    if not datum.is_antidominant(lam):
        raise ValueError("Y operators are indexed by antidominant weights")
    if not datum.in_weight_lattice_Mhat(lam):
        raise ValueError("weight is not in the extended translation lattice")
    elem = ExtendedWeylElement.translation(datum, lam)
    word = reduced_word(elem)
    factors: list[Factor] = [RFactor(a) for a in word.inversion_sequence()]
    factors.append(GroupFactor(elem))
    return DifferenceReflectionOperator(datum, factors)


def operator_from_word(datum: AffineRootDatum, word) -> DifferenceReflectionOperator:
    """The R-matrix product attached to a reduced word (no trailing group
    factor): used for word-independence and braid checks."""
    return DifferenceReflectionOperator(
        datum, [RFactor(a) for a in word.inversion_sequence()]
    )


# ---------------------------------------------------------------------------
# closed forms on the invariant subspace (xi = -rho_mu)
# ---------------------------------------------------------------------------


def _wmat_elems(datum: AffineRootDatum):
    from .weyl import finite_weyl_group

    ident = ExtendedWeylElement.identity(datum)
    return [
        ExtendedWeylElement(datum, w, ident.shift) for w in finite_weyl_group(datum)
    ]


def _composite_coeff(ctx, factors_fns, welem):
    """y -> prod of fns at w^{-1} y (the Weyl-translated coefficient)."""
    winv = np.array([[float(x) for x in row] for row in welem.inverse_matrix()])

    def fn(ys):
        yw = ys @ winv.T
        out = np.ones(ys.shape[0], dtype=complex)
        for f in factors_fns:
            out = out * f(yw)
        return out

    return fn


def minuscule_closed_form(datum: AffineRootDatum, lam) -> DifferenceReflectionOperator:
    """Explicit form of ``Y^lam`` on Weyl-invariant functions when ``-lam``
    is minuscule: an average over the finite Weyl group of products of
    identity coefficients, with ``xi = -rho_mu`` implied by the derivation."""
    lam = vec(lam)
    from .weyl import is_minuscule, stabiliser_order

    if not is_minuscule(datum, lam):
        raise ValueError("closed form needs -lam minuscule")
    stab = stabiliser_order(datum, lam)

    def build(ctx: EvalContext):
        roots = [
            a
            for a in datum.pos_roots
            if datum.pair(lam, a) == -datum.gamma_of(a)
        ]
        fns = [
            h_coefficient(ctx, AffineRoot(a, F(0)), ctx.mu[datum.class_of(a)])
            for a in roots
        ]
        terms = []
        for welem in _wmat_elems(datum):
            shift_elem = welem * ExtendedWeylElement.translation(datum, lam)
            coeff = _composite_coeff(ctx, fns, welem)
            terms.append(
                (
                    (lambda ys, c=coeff, s=stab: c(ys) / s),
                    shift_elem,
                )
            )
        return terms

    return DifferenceReflectionOperator(datum, [TermListFactor(build)])


def quasi_minuscule_closed_form(datum: AffineRootDatum) -> DifferenceReflectionOperator:
    """Explicit form of ``Y^{-nu(theta^vee)}`` on Weyl-invariant functions."""
    from .weyl import stabiliser_order

    nth = datum.nu_theta_v
    lam = vec_scale(F(-1), nth)
    stab = stabiliser_order(datum, lam)
    a0 = datum.a0
    aff = AffineRoot(
        vec_scale(F(1, a0), datum.theta), F(1, a0)
    )  # a_0^{-1}(theta + delta)

    def build(ctx: EvalContext):
        roots = [
            a
            for a in datum.pos_roots
            if datum.coroot_pair(a, datum.theta) > 0
        ]
        fns = [
            h_coefficient(ctx, AffineRoot(a, F(0)), ctx.mu[datum.class_of(a)])
            for a in roots
        ]
        mu0 = datum.mu_alpha0(ctx.mu)
        rho = datum.rho_mu(ctx.mu)
        h_t = h_coefficient(ctx, aff, mu0)
        h_c = h_coefficient(ctx, aff, -datum.pair(rho, datum.theta))
        terms = []
        for welem in _wmat_elems(datum):
            base = _composite_coeff(ctx, fns, welem)
            ht_w = _composite_coeff(ctx, [h_t], welem)
            hc_w = _composite_coeff(ctx, [h_c], welem)
            shift_elem = welem * ExtendedWeylElement.translation(datum, lam)
            terms.append(
                (
                    (lambda ys, b=base, h=ht_w, s=stab: b(ys) * h(ys) / s),
                    shift_elem,
                )
            )
            terms.append(
                (
                    (lambda ys, b=base, h=hc_w, s=stab: -b(ys) * h(ys) / s),
                    welem,
                )
            )
        return terms

    return DifferenceReflectionOperator(datum, [TermListFactor(build)])


def leading_term_coefficient(ctx: EvalContext, lam) -> "np.ndarray":
    """The coefficient of ``t_lam`` in ``Y^lam``: the product of identity
    coefficients over the inversion set of ``t_lam``."""
    d = ctx.datum
    lam = vec(lam)
    roots = d.translation_inversion_set(lam)
    fns = [h_coefficient(ctx, a, ctx.mu[d.class_of(a.bar)]) for a in roots]

    def fn(ys):
        out = np.ones(np.atleast_2d(ys).shape[0], dtype=complex)
        for f in fns:
            out = out * f(np.atleast_2d(ys))
        return out

    return fn


# ---------------------------------------------------------------------------
# gauged ("bar") factors acting on theta spans
# ---------------------------------------------------------------------------


def bar_r_factors(
    datum: AffineRootDatum,
    root: AffineRoot,
    mu: dict[Fraction, Fraction],
    xi: Vec,
    eta: Vec,
) -> list[Factor]:
    """``t_{eps1} R_{bar(alpha)} t_{eps2}`` with rational gauge shifts.

    ``eta`` must pair to zero with the coroot of ``root``; the result is then
    independent of its choice.  The middle factor is the reflection factor of
    the *finite* part of the root.
    """
    d = datum
    bar = vec(root.bar)
    mu_a = mu[d.class_of(bar)]
    h = d.h_vee_mu(mu)
    half = vec_scale(-mu_a / 2, bar)
    eps1 = vec_scale(1 / h, vec_add(vec_sub(half, vec(xi)), vec(eta)))
    eps2 = vec_scale(1 / h, vec_sub(vec_sub(half, vec(eta)), vec_scale(F(-1), vec(xi))))
    return [
        GroupFactor(ExtendedWeylElement.translation(d, eps1)),
        RFactor(AffineRoot(bar, F(0))),
        GroupFactor(ExtendedWeylElement.translation(d, eps2)),
    ]


def bar_y_operator(
    datum: AffineRootDatum,
    lam,
    mu,
    xi,
) -> DifferenceReflectionOperator:
    """Gauged form of ``Y^lam`` acting on level-``k`` theta spans: the product
    of gauged reflection factors along a reduced word, with the gauge vectors
    chosen per position so the whole product carries no net translation
    (beyond ``t_lam``) when ``xi = -rho_mu``."""
    lam = vec(lam)
    mud = coupling_dict(datum, mu)
    xiv = vec(xi)
    elem = ExtendedWeylElement.translation(datum, lam)
    word = reduced_word(elem)
    seq = word.inversion_sequence()
    rho = datum.rho_mu(mud)
    # per-position couplings nu_n: mu of the letter unless it is the affine
    # node, in which case -(rho_mu | theta)
    nus = []
    for letter, a in zip(word.letters, seq, strict=True):
        if letter == 0:
            nus.append(-datum.pair(rho, datum.theta))
        else:
            nus.append(mud[datum.class_of(a.bar)])
    factors: list[Factor] = []
    acc = vec_scale(F(-1), rho)
    for n, a in enumerate(seq):
        eta = vec_add(acc, vec_scale(nus[n] / 2, a.bar))
        factors.extend(bar_r_factors(datum, a, mud, xiv, eta))
        acc = vec_add(acc, vec_scale(nus[n], a.bar))
    return DifferenceReflectionOperator(datum, factors)


def capital_xi(datum: AffineRootDatum, mu, xi) -> Vec:
    """The conjugation direction ``(xi + rho_mu) / h^vee_mu``."""
    mud = coupling_dict(datum, mu)
    return vec_scale(
        1 / datum.h_vee_mu(mud), vec_add(vec(xi), datum.rho_mu(mud))
    )


def weighted_inversion_sum(datum: AffineRootDatum, lam, mu) -> Vec:
    """``-(1/h^vee_mu) sum over the inversion set of t_lam of mu_alpha bar``,
    which equals ``lam`` itself (checked exactly in the tests)."""
    lam = vec(lam)
    mud = coupling_dict(datum, mu)
    acc = zero_vec(datum.l)
    for a in datum.translation_inversion_set(lam):
        acc = vec_add(acc, vec_scale(mud[datum.class_of(a.bar)], a.bar))
    return vec_scale(-1 / datum.h_vee_mu(mud), acc)


# S-matrix data for the scalar produced by R_alpha R_{-alpha}: the quadratic
# forms in the slot weights and the 4x4 mixing matrix acting on the vector of
# wp0 differences.
_U_MIX = 0.25 * np.array(
    [[1, 0, 0, 0], [-1, 0, 0, 1], [-1, 4, 0, 0], [1, -4, 4, -1]], dtype=float
)
_U_PVECS = tuple(
    np.array(v, dtype=float)
    for v in ((2, 1, 1, 2), (0, 0, 1, 2), (0, 1, 1, 0), (0, 0, 1, 0))
)


def unitarity_scalar(ctx: EvalContext, bar: Vec) -> complex:
    """The constant ``u_alpha`` with ``R_alpha R_{-alpha} = u_alpha Id``.

    Quadratic in the normalised slot weights, with coefficients given by
    differences of the even elliptic function ``wp0`` evaluated at the
    coupling and at ``<xi, alpha^vee>``.
    """
    from .theta import sym_theta1_prime_zero, wp0

    d = ctx.datum
    key = d.class_of(bar)
    g = d.gamma_of(bar)
    mu_a = ctx.mu[key]
    xiv = xi_coroot_pairing(ctx, bar)
    slots = d.n_pairs_table(key)
    tau = ctx.tau
    zt, dvec = [], []
    for zj, slot in zip(ctx.zeta[key], slots, strict=True):
        if slot is None:
            zt.append(0.0)
            dvec.append(0.0)
            continue
        m, n = slot
        ng = float(n * g)
        w = ng * tau / float(m)
        zt.append(
            zj
            * (-1j * jacobi_theta(1, w * float(mu_a), ng * tau, ctx.cfg))
            / sym_theta1_prime_zero(ng, tau, ctx.cfg)
        )
        dvec.append(
            wp0(w * float(mu_a), ng, tau, ctx.cfg)
            - wp0(w * float(xiv), ng, tau, ctx.cfg)
        )
    ztv = np.array(zt, dtype=complex)
    dv = np.array(dvec, dtype=complex)
    row = np.array([(p @ ztv) ** 2 for p in _U_PVECS])
    return complex(row @ _U_MIX @ dv)


# ---------------------------------------------------------------------------
# explicit operators in orthogonal coordinates (independent oracles)
# ---------------------------------------------------------------------------


def a_type_difference_op(l: int, mu_p: complex, kappa_p: complex, tau: complex, cfg=DEFAULT_SERIES):
    """The classical difference operator in ``l`` variables: coefficient
    products of ``theta_1`` ratios, a step ``kappa_p`` on one variable and a
    uniform step ``-kappa_p / l`` on all.  Returns ``apply(f, xs) -> array``
    for ``xs`` of shape ``(npts, l)``."""

    def apply(f, xs):
        xs = np.atleast_2d(np.asarray(xs, dtype=complex))
        out = np.zeros(xs.shape[0], dtype=complex)
        for j in range(l):
            coeff = np.ones(xs.shape[0], dtype=complex)
            for k in range(l):
                if k == j:
                    continue
                dz = xs[:, j] - xs[:, k]
                coeff *= jacobi_theta(1, dz - mu_p, tau, cfg) / theta1_guarded(
                    dz, tau, cfg
                )
            xt = xs.copy()
            xt[:, j] += kappa_p
            xt -= kappa_p / l
            out += coeff * np.asarray(f(xt))
        return out

    return apply


_BC_PERMS = (
    (0, 1, 2, 3),
    (1, 0, 3, 2),
    (2, 3, 0, 1),
    (3, 2, 1, 0),
)

# classical index -> our jacobi_theta index (1..4 with 4 stored as 0)
_TH = (1, 2, 3, 0)


def bc_type_difference_op(
    l: int,
    mu_p: complex,
    nus: tuple[complex, complex, complex, complex],
    nubars: tuple[complex, complex, complex, complex],
    kappa_p: complex,
    tau: complex,
    cfg=DEFAULT_SERIES,
):
    """The eight-parameter difference operator in ``l`` variables with four
    theta indices: two families of shifted terms plus a constant part.
    Returns ``apply(f, xs) -> array``."""

    def th(r, z):
        return jacobi_theta(_TH[r], z, tau, cfg)

    def th_guard(r, z):
        if _TH[r] == 1:
            return theta1_guarded(z, tau, cfg)
        return jacobi_theta(_TH[r], z, tau, cfg)

    from .theta import theta1_prime_zero_classical

    def apply(f, xs):
        xs = np.atleast_2d(np.asarray(xs, dtype=complex))
        out = np.zeros(xs.shape[0], dtype=complex)
        for sign in (1.0, -1.0):
            for j in range(l):
                x = sign * xs[:, j]
                coeff = np.ones(xs.shape[0], dtype=complex)
                for k in range(l):
                    if k == j:
                        continue
                    for s2 in (1.0, -1.0):
                        dz = x + s2 * xs[:, k]
                        coeff *= th(0, dz - mu_p) / th_guard(0, dz)
                for r in range(4):
                    coeff *= th(r, x - nus[r]) / th_guard(r, x)
                    coeff *= th(r, x + kappa_p / 2 - nubars[r]) / th_guard(
                        r, x + kappa_p / 2
                    )
                xt = xs.copy()
                xt[:, j] += sign * kappa_p
                out += coeff * np.asarray(f(xt))
        dth = theta1_prime_zero_classical(tau, cfg)
        for p in range(4):
            perm = _BC_PERMS[p]
            const = (
                2.0
                * (math.pi / dth) ** 2
                / (
                    jacobi_theta(1, -mu_p, tau, cfg)
                    * jacobi_theta(1, -kappa_p - mu_p, tau, cfg)
                )
            )
            for r in range(4):
                const *= th(r, -kappa_p - nus[perm[r]]) * th(r, -nubars[perm[r]])
            coeff = np.ones(xs.shape[0], dtype=complex)
            for j in range(l):
                for s2 in (1.0, -1.0):
                    z = s2 * xs[:, j] - kappa_p / 2
                    coeff *= th(p, z - mu_p) / th_guard(p, z)
            out -= const * coeff
        return out

    return apply
