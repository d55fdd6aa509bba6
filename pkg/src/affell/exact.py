"""Small exact linear algebra helpers over the rationals.

Everything here works on tuples of :class:`fractions.Fraction` so that
vectors and matrices are hashable and equality is exact.  Matrices are
stored row-major as tuples of tuples and act on column vectors.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

Vec = tuple[Fraction, ...]
Mat = tuple[Vec, ...]


def vec(entries: Iterable) -> Vec:
    return tuple(Fraction(x) for x in entries)


def mat(rows: Iterable[Iterable]) -> Mat:
    return tuple(vec(r) for r in rows)


def zero_vec(n: int) -> Vec:
    return (Fraction(0),) * n


def identity_mat(n: int) -> Mat:
    return tuple(tuple(Fraction(1 if i == j else 0) for j in range(n)) for i in range(n))


def vec_add(a: Vec, b: Vec) -> Vec:
    return tuple(x + y for x, y in zip(a, b, strict=True))


def vec_sub(a: Vec, b: Vec) -> Vec:
    return tuple(x - y for x, y in zip(a, b, strict=True))


def vec_scale(c, a: Vec) -> Vec:
    c = Fraction(c)
    return tuple(c * x for x in a)


def mat_vec(m: Mat, v: Vec) -> Vec:
    return tuple(sum(row[j] * v[j] for j in range(len(v))) for row in m)


def mat_mul(a: Mat, b: Mat) -> Mat:
    n, k, p = len(a), len(b), len(b[0])
    return tuple(
        tuple(sum(a[i][t] * b[t][j] for t in range(k)) for j in range(p)) for i in range(n)
    )


def mat_transpose(m: Mat) -> Mat:
    return tuple(zip(*m, strict=True))


def bilinear(g: Mat, a: Vec, b: Vec) -> Fraction:
    """``a^T g b`` for a symmetric form ``g``."""
    return sum(a[i] * sum(g[i][j] * b[j] for j in range(len(b))) for i in range(len(a)))


def mat_inv(m: Mat) -> Mat:
    """Invert a square rational matrix by Gauss-Jordan elimination."""
    n = len(m)
    aug = [list(row) + [Fraction(1 if i == j else 0) for j in range(n)] for i, row in enumerate(m)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise ValueError("singular matrix")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv_p = 1 / aug[col][col]
        aug[col] = [x * inv_p for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return tuple(tuple(row[n:]) for row in aug)


def solve(m: Mat, v: Vec) -> Vec:
    return mat_vec(mat_inv(m), v)


def is_integral(v: Sequence[Fraction]) -> bool:
    return all(x.denominator == 1 for x in v)


def _hnf_int(rows: list[list[int]]) -> list[list[int]]:
    """Row-style Hermite normal form of an integer matrix (nonzero rows kept)."""
    rows = [list(r) for r in rows if any(r)]
    if not rows:
        return []
    ncols = len(rows[0])
    out: list[list[int]] = []
    col = 0
    while col < ncols and rows:
        # Euclid on the current column.
        while True:
            nz = [r for r in rows if r[col] != 0]
            if len(nz) <= 1:
                break
            nz.sort(key=lambda r: abs(r[col]))
            a = nz[0]
            for b in nz[1:]:
                q = b[col] // a[col]
                for j in range(ncols):
                    b[j] -= q * a[j]
        piv = next((r for r in rows if r[col] != 0), None)
        if piv is not None:
            rows.remove(piv)
            if piv[col] < 0:
                piv = [-x for x in piv]
            out.append(piv)
        col += 1
    return out


class Lattice:
    """A full-rank lattice in rational ``n``-space, given by generators.

    Membership tests are exact; the stored basis is in Hermite normal form
    (up to the overall denominator used to clear fractions).
    """

    def __init__(self, generators: Iterable[Sequence]):
        gens = [vec(g) for g in generators]
        if not gens:
            raise ValueError("need at least one generator")
        self.dim = len(gens[0])
        den = math.lcm(*[x.denominator for g in gens for x in g] or [1])
        int_rows = [[int(x * den) for x in g] for g in gens]
        hnf = _hnf_int(int_rows)
        if len(hnf) != self.dim:
            raise ValueError("generators do not span full rank")
        self.basis: Mat = tuple(tuple(Fraction(x, den) for x in row) for row in hnf)
        self._binv = mat_inv(self.basis)

    def coords(self, v: Sequence) -> Vec:
        """Coordinates of ``v`` in the lattice basis (rational)."""
        return mat_vec(mat_transpose(self._binv), vec(v))

    def __contains__(self, v) -> bool:
        return is_integral(self.coords(v))

    def scaled(self, c) -> "Lattice":
        return Lattice([vec_scale(c, b) for b in self.basis])

    def __eq__(self, other) -> bool:
        return isinstance(other, Lattice) and self.basis == other.basis

    def __hash__(self):
        return hash(self.basis)


def _smith_normal_form(a: list[list[int]]) -> tuple[list[list[int]], list[list[int]], list[list[int]]]:
    """Return ``(u, d, v)`` with ``u a v = d`` diagonal, ``u, v`` unimodular."""
    n = len(a)
    m = len(a[0])
    d = [row[:] for row in a]
    u = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    v = [[1 if i == j else 0 for j in range(m)] for i in range(m)]

    def row_op(i, j, q):  # row_i -= q * row_j
        for t in range(m):
            d[i][t] -= q * d[j][t]
        for t in range(n):
            u[i][t] -= q * u[j][t]

    def col_op(i, j, q):  # col_i -= q * col_j
        for t in range(n):
            d[t][i] -= q * d[t][j]
        for t in range(m):
            v[t][i] -= q * v[t][j]

    def swap_rows(i, j):
        d[i], d[j] = d[j], d[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for t in range(n):
            d[t][i], d[t][j] = d[t][j], d[t][i]
        for t in range(m):
            v[t][i], v[t][j] = v[t][j], v[t][i]

    k = 0
    while k < min(n, m):
        # find a nonzero pivot
        piv = None
        for i in range(k, n):
            for j in range(k, m):
                if d[i][j] != 0:
                    piv = (i, j)
                    break
            if piv:
                break
        if piv is None:
            break
        swap_rows(k, piv[0])
        swap_cols(k, piv[1])
        while True:
            done = True
            for i in range(k + 1, n):
                if d[i][k] != 0:
                    q = d[i][k] // d[k][k]
                    row_op(i, k, q)
                    if d[i][k] != 0:
                        swap_rows(k, i)
                    done = False
            for j in range(k + 1, m):
                if d[k][j] != 0:
                    q = d[k][j] // d[k][k]
                    col_op(j, k, q)
                    if d[k][j] != 0:
                        swap_cols(k, j)
                    done = False
            if done:
                break
        if d[k][k] < 0:
            row_op(k, k, 2)  # negate row: row_k -= 2*row_k
        k += 1
    return u, d, v


def quotient_representatives(ambient: Lattice, sub: Lattice) -> list[Vec]:
    """Coset representatives of ``ambient / sub`` (``sub`` must lie in ``ambient``)."""
    n = ambient.dim
    rel = []
    for b in sub.basis:
        c = ambient.coords(b)
        if not is_integral(c):
            raise ValueError("sub is not a sublattice of ambient")
        rel.append([int(x) for x in c])
    u, d, v = _smith_normal_form(rel)
    # New ambient basis rows: B' = V^{-1} B ; sub basis in it is diag(d).
    vinv = mat_inv(mat(v))
    bprime = mat_mul(vinv, ambient.basis)
    diag = [d[i][i] for i in range(n)]
    reps: list[Vec] = []

    def rec(i: int, acc: Vec):
        if i == n:
            reps.append(acc)
            return
        for r in range(abs(diag[i])):
            rec(i + 1, vec_add(acc, vec_scale(r, bprime[i])))

    rec(0, zero_vec(n))
    return reps
