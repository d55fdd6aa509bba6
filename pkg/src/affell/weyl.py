"""Extended affine Weyl group elements, lengths, and reduced words.

An element ``w t_mu`` (finite part ``w``, translation ``mu``) is stored as
the pair ``(wmat, mu)`` with ``wmat`` the exact matrix of ``w`` in the
simple-root basis.  The composition convention is

    (w1, mu1) * (w2, mu2) = (w1 w2, w2^{-1} mu1 + mu2)

and the action on a level-zero vector ``bar + c*delta`` is

    (w, mu): bar + c*delta  |-->  w(bar) + (c - (bar|mu)) * delta.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .exact import (
    Mat,
    Vec,
    identity_mat,
    mat_inv,
    mat_mul,
    mat_vec,
    vec,
    vec_add,
    vec_scale,
    zero_vec,
)
from .root_system import AffineRoot, AffineRootDatum


class ExtendedWeylElement:
    """An element of the extended affine Weyl group of a datum."""

    __slots__ = ("datum", "wmat", "shift", "_inv", "_hash")

    def __init__(self, datum: AffineRootDatum, wmat: Mat, shift: Vec):
        self.datum = datum
        self.wmat = wmat
        self.shift = shift
        self._inv = None
        self._hash = None

    # -- construction -------------------------------------------------------

    @staticmethod
    def identity(datum: AffineRootDatum) -> "ExtendedWeylElement":
        return ExtendedWeylElement(datum, identity_mat(datum.l), zero_vec(datum.l))

    @staticmethod
    def translation(datum: AffineRootDatum, lam) -> "ExtendedWeylElement":
        return ExtendedWeylElement(datum, identity_mat(datum.l), vec(lam))

    @staticmethod
    def reflection(datum: AffineRootDatum, root: AffineRoot) -> "ExtendedWeylElement":
        """Reflection in a real root: ``r_{bar + c delta} = r_bar t_{c nu(bar^vee)}``."""
        bar = vec(root.bar)
        cols = []
        for j in range(datum.l):
            e = datum._simple(j)
            cols.append(vec_add(e, vec_scale(-datum.coroot_pair(e, bar), bar)))
        wmat = tuple(zip(*cols, strict=True))
        shift = vec_scale(Fraction(root.c) * 2 / datum.sq_len(bar), bar)
        return ExtendedWeylElement(datum, wmat, shift)

    @staticmethod
    def simple(datum: AffineRootDatum, i: int) -> "ExtendedWeylElement":
        return ExtendedWeylElement.reflection(datum, datum.simple_root(i))

    # -- group structure ----------------------------------------------------

    def __mul__(self, other: "ExtendedWeylElement") -> "ExtendedWeylElement":
        w2inv = other.inverse_matrix()
        return ExtendedWeylElement(
            self.datum,
            mat_mul(self.wmat, other.wmat),
            vec_add(mat_vec(w2inv, self.shift), other.shift),
        )

    def inverse_matrix(self) -> Mat:
        if self._inv is None:
            self._inv = mat_inv(self.wmat)
        return self._inv

    def inverse(self) -> "ExtendedWeylElement":
        winv = self.inverse_matrix()
        return ExtendedWeylElement(
            self.datum, winv, vec_scale(-1, mat_vec(self.wmat, self.shift))
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ExtendedWeylElement)
            and self.wmat == other.wmat
            and self.shift == other.shift
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.wmat, self.shift))
        return self._hash

    def __repr__(self):
        return f"ExtendedWeylElement(w={self.wmat}, t={self.shift})"

    @property
    def is_translation(self) -> bool:
        return self.wmat == identity_mat(self.datum.l)

    # -- actions ------------------------------------------------------------

    def act_on_weight(self, v: Vec) -> Vec:
        """Finite-part action (ignores the translation)."""
        return mat_vec(self.wmat, vec(v))

    def act_on_root(self, root: AffineRoot) -> AffineRoot:
        bar = vec(root.bar)
        return AffineRoot(
            mat_vec(self.wmat, bar),
            Fraction(root.c) - self.datum.pair(bar, self.shift),
        )

    # -- length and words ---------------------------------------------------

    def _sends_negative(self, root: AffineRoot) -> bool:
        """Whether ``self^{-1}`` maps the (positive) real root to a negative one."""
        d = self.datum
        bar = vec(root.bar)
        c_new = Fraction(root.c) + d.pair(bar, mat_vec(self.wmat, self.shift))
        if c_new != 0:
            return c_new < 0
        newbar = mat_vec(self.inverse_matrix(), bar)
        return not d.is_positive_root(AffineRoot(newbar, Fraction(0)))

    def inversion_set(self) -> tuple[AffineRoot, ...]:
        """All positive real roots sent negative by ``self^{-1}``."""
        d = self.datum
        wmu = mat_vec(self.wmat, self.shift)
        bound = max([abs(d.pair(v, wmu)) for v in d.pos_roots] + [Fraction(0)])
        out: list[AffineRoot] = []
        bars = [(b, d.gamma_of(b)) for b in d.pos_roots]
        bars += [(vec_scale(-1, b), d.gamma_of(b)) for b in d.pos_roots]
        for bar, g in bars:
            n = 0
            while True:
                c = g * n
                if c > bound + g:
                    break
                root = AffineRoot(bar, Fraction(c))
                if d.is_positive_root(root) and self._sends_negative(root):
                    out.append(root)
                n += 1
        for hbar in d.half_root_bars():
            c = Fraction(1, 2)
            while c <= bound + 1:
                root = AffineRoot(hbar, c)
                if self._sends_negative(root):
                    out.append(root)
                c += 1
        return tuple(out)

    def length(self) -> int:
        return len(self.inversion_set())


@dataclass(frozen=True)
class ReducedWord:
    """A reduced decomposition ``w = r_{i_1} ... r_{i_len} omega``."""

    datum: AffineRootDatum = field(compare=False, hash=False, repr=False)
    letters: tuple[int, ...]
    omega: ExtendedWeylElement

    def element(self) -> ExtendedWeylElement:
        acc = ExtendedWeylElement.identity(self.datum)
        for i in self.letters:
            acc = acc * ExtendedWeylElement.simple(self.datum, i)
        return acc * self.omega

    def inversion_sequence(self) -> tuple[AffineRoot, ...]:
        """Roots ``alpha^k = r_{i_1} ... r_{i_{k-1}}(alpha_{i_k})``."""
        d = self.datum
        out = []
        prefix = ExtendedWeylElement.identity(d)
        for i in self.letters:
            out.append(prefix.act_on_root(d.simple_root(i)))
            prefix = prefix * ExtendedWeylElement.simple(d, i)
        return tuple(out)


def reduced_word(elem: ExtendedWeylElement) -> ReducedWord:
    """Greedy reduced word: repeatedly strip the smallest-index left descent."""
    d = elem.datum
    letters: list[int] = []
    cur = elem
    total = cur.length()
    for _ in range(total):
        for i in range(d.l + 1):
            if cur._sends_negative(d.simple_root(i)):
                letters.append(i)
                cur = ExtendedWeylElement.simple(d, i) * cur
                break
        else:
            raise AssertionError("no descent found before reaching length zero")
    if cur.length() != 0:
        raise AssertionError("residual element has positive length")
    return ReducedWord(d, tuple(letters), cur)


def is_minuscule(datum: AffineRootDatum, lam) -> bool:
    """Antidominant ``lam`` is minuscule when ``t_lam``'s inversion set is finite-level."""
    return all(a.c == 0 for a in datum.translation_inversion_set(vec(lam)))


def quasi_minuscule_weight(datum: AffineRootDatum) -> tuple[Vec, int | None]:
    """``nu(theta^vee)`` together with the index of the weight-basis element it
    equals (the vertex adjacent to the affine node), or ``None`` for type A."""
    v = datum.nu_theta_v
    for i, lam in enumerate(datum.weight_basis):
        if lam == v:
            return v, i + 1
    return v, None


@functools.lru_cache(maxsize=None)
def finite_weyl_group(datum: AffineRootDatum) -> tuple[Mat, ...]:
    """All matrices of the finite Weyl group (BFS over simple reflections)."""
    gens = [ExtendedWeylElement.simple(datum, i + 1).wmat for i in range(datum.l)]
    seen = {identity_mat(datum.l)}
    frontier = list(seen)
    while frontier:
        nxt = []
        for m in frontier:
            for g in gens:
                p = mat_mul(g, m)
                if p not in seen:
                    seen.add(p)
                    nxt.append(p)
        frontier = nxt
    return tuple(sorted(seen))


def stabiliser_order(datum: AffineRootDatum, lam: Vec) -> int:
    lam = vec(lam)
    return sum(1 for m in finite_weyl_group(datum) if mat_vec(m, lam) == lam)


def bfs_length_table(datum: AffineRootDatum, max_len: int) -> dict[ExtendedWeylElement, int]:
    """Word lengths of all affine Weyl group elements up to ``max_len``,
    found by breadth-first search over the simple generators (an oracle
    independent of the root-counting length formula)."""
    start = ExtendedWeylElement.identity(datum)
    table = {start: 0}
    frontier = [start]
    depth = 0
    while frontier and depth < max_len:
        depth += 1
        nxt = []
        for w in frontier:
            for i in range(datum.l + 1):
                u = w * ExtendedWeylElement.simple(datum, i)
                if u not in table:
                    table[u] = depth
                    nxt.append(u)
        frontier = nxt
    return table
