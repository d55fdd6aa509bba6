"""Numerics for Jacobi theta functions and lattice theta series.

Two layers live here:

* classical one-variable functions ``theta_j(z; tau)`` (period-1 argument
  convention, ``q = exp(pi*i*tau)``), the Dedekind eta and the Weierstrass
  P-function, all as truncated series with explicit tail control;
* "symbol" wrappers used by the operator layer.  These evaluate the
  abstract theta symbols of the algebraic side, in which the derivative
  symbol at zero is *defined* as ``eta(gamma*tau)**3`` -- it differs from
  the classical derivative ``theta_1'(0) = 2*pi*eta**3`` by the factor
  ``2*pi``, which cancels in every ratio the operators use.

Lattice theta series of a given level over the translation lattice ``M``
of a root datum, and their Weyl-symmetrised combinations, are what the
span-closure checks run against.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .exact import Lattice, Vec, quotient_representatives, vec, vec_scale, vec_sub
from .root_system import AffineRootDatum
from .weyl import finite_weyl_group
from .exact import mat_vec


class TruncationError(RuntimeError):
    """The requested tolerance cannot be met within the term budget."""


class PoleError(ArithmeticError):
    """An evaluation point is too close to a zero of theta_1 (a pole of a ratio)."""


@dataclass(frozen=True)
class SeriesConfig:
    tol: float = 1e-14
    max_terms: int = 4000
    im_tau_floor: float = 0.3
    pole_tol: float = 1e-8


DEFAULT_SERIES = SeriesConfig()


def _check_tau(tau: complex, cfg: SeriesConfig) -> None:
    if tau.imag < cfg.im_tau_floor:
        raise TruncationError(
            f"Im tau = {tau.imag:g} below the supported floor {cfg.im_tau_floor:g}"
        )


def _window(tau: complex, z: np.ndarray, cfg: SeriesConfig) -> int:
    """Summation half-width so the dropped tail is below ``cfg.tol``."""
    b = tau.imag
    y = float(np.max(np.abs(z.imag))) if z.size else 0.0
    n = y / b + math.sqrt((y / b) ** 2 + max(math.log(1.0 / cfg.tol), 1.0) / (math.pi * b))
    n = int(math.ceil(n)) + 2
    if 2 * n + 1 > cfg.max_terms:
        raise TruncationError("theta series would exceed the term budget")
    return n


def jacobi_theta(j: int, z, tau: complex, cfg: SeriesConfig = DEFAULT_SERIES):
    """Classical ``theta_j(z; tau)`` for ``j in {0, 1, 2, 3}`` (``0`` meaning
    the even function often written ``theta_4``); vectorised over ``z``."""
    zs = np.asarray(z, dtype=complex)
    scalar = zs.ndim == 0
    zs = np.atleast_1d(zs)
    _check_tau(tau, cfg)
    n = _window(tau, zs, cfg)
    if j in (1, 2):
        k = np.arange(-n, n) + 0.5
    elif j in (0, 3):
        k = np.arange(-n, n + 1, dtype=float)
    else:
        raise ValueError(f"theta index {j} not in 0..3")
    if j == 1:
        signs = np.where(np.arange(-n, n) % 2 == 0, 0.0, 1j * math.pi)
    elif j == 0:
        signs = np.where(k.astype(int) % 2 == 0, 0.0, 1j * math.pi)
    else:
        signs = np.zeros_like(k)
    # sum exp of the combined exponent: splitting it into a Gaussian phase
    # times exp(2 pi i z k) overflows for moderate |Im z| even though each
    # full term (and the sum) is perfectly representable
    expo = (
        1j * math.pi * tau * k * k
        + signs
        + 2j * math.pi * np.multiply.outer(zs, k)
    )
    vals = np.exp(expo).sum(axis=-1)
    if j == 1:
        vals = -1j * vals
    return vals[0] if scalar else vals


def theta1(z, tau, cfg: SeriesConfig = DEFAULT_SERIES):
    return jacobi_theta(1, z, tau, cfg)


def theta1_guarded(z, tau, cfg: SeriesConfig = DEFAULT_SERIES):
    """``theta_1`` for use in denominators: raises :class:`PoleError` near zeros.

    The scale against which "near zero" is judged is ``|theta_2| + |theta_3|``,
    which is bounded away from zero on the whole plane.
    """
    vals = np.atleast_1d(np.asarray(theta1(z, tau, cfg)))
    scale = np.abs(jacobi_theta(2, z, tau, cfg)) + np.abs(jacobi_theta(3, z, tau, cfg))
    scale = np.atleast_1d(scale)
    bad = np.abs(vals) < cfg.pole_tol * scale
    if np.any(bad):
        raise PoleError("evaluation point too close to a theta_1 zero")
    out = np.asarray(theta1(z, tau, cfg))
    return out


def theta1_prime_zero_classical(tau: complex, cfg: SeriesConfig = DEFAULT_SERIES) -> complex:
    """``theta_1'(0; tau)`` by term-wise differentiation of the series."""
    _check_tau(tau, cfg)
    n = _window(tau, np.zeros(1), cfg)
    k = np.arange(-n, n) + 0.5
    sign = np.where(np.arange(-n, n) % 2 == 0, 1.0, -1.0)
    return complex(np.sum(sign * 2 * math.pi * k * np.exp(1j * math.pi * tau * k * k)))


def dedekind_eta(tau: complex, cfg: SeriesConfig = DEFAULT_SERIES) -> complex:
    """``eta(tau) = q^{1/24} prod (1 - q^n)`` with ``q = exp(2 pi i tau)``."""
    _check_tau(tau, cfg)
    q = cmath.exp(2j * math.pi * tau)
    out = cmath.exp(2j * math.pi * tau / 24)
    qn = 1.0 + 0j
    for n in range(1, cfg.max_terms):
        qn *= q
        out *= 1.0 - qn
        if abs(qn) < cfg.tol:
            return out
    raise TruncationError("eta product did not converge within the term budget")


# ---------------------------------------------------------------------------
# symbol layer: theta symbols evaluated at a scalarised argument
# ---------------------------------------------------------------------------


def sym_theta(j: int, z, gamma, tau: complex, cfg: SeriesConfig = DEFAULT_SERIES):
    """The theta symbol of index ``j`` and modular scale ``gamma`` at scalar
    argument ``z`` (the pairing of the symbol's weight with the point)."""
    g = float(gamma)
    if j == 1:
        return -1j * jacobi_theta(1, z, g * tau, cfg)
    return jacobi_theta(j, z, g * tau, cfg)


def sym_theta1_prime_zero(gamma, tau: complex, cfg: SeriesConfig = DEFAULT_SERIES) -> complex:
    """The symbolic normalisation ``eta(gamma*tau)**3`` (no ``2 pi`` factor)."""
    return dedekind_eta(float(gamma) * tau, cfg) ** 3


def sigma_nu(nu, z, gamma, tau: complex, cfg: SeriesConfig = DEFAULT_SERIES):
    """The elliptic kernel: ratio of four theta symbols; ``nu`` is the
    delta-direction offset, ``z`` the scalarised weight argument."""
    g = float(gamma)
    nuv = complex(nu)
    num = sym_theta(1, np.asarray(z) + nuv * tau, gamma, tau, cfg)
    den = -1j * theta1_guarded(z, g * tau, cfg)
    den0 = -1j * theta1_guarded(nuv * tau, g * tau, cfg)
    return num * sym_theta1_prime_zero(gamma, tau, cfg) / (den * den0)


def wp0(z, gamma, tau: complex, cfg: SeriesConfig = DEFAULT_SERIES):
    """The even square combination ``(theta^0(z) eta^3 / (theta^1(z) theta^0(0)))^2``.

    Under the classical correspondence this equals
    ``-(P(z) - P(gamma*tau/2)) / (4 pi^2)`` with Weierstrass ``P`` of periods
    ``(1, gamma*tau)``.
    """
    g = float(gamma)
    num = sym_theta(0, z, gamma, tau, cfg) * sym_theta1_prime_zero(gamma, tau, cfg)
    den = -1j * theta1_guarded(z, g * tau, cfg) * sym_theta(0, 0.0, gamma, tau, cfg)
    return (num / den) ** 2


def weierstrass_p(z: complex, tau: complex, cfg: SeriesConfig = DEFAULT_SERIES) -> complex:
    """Weierstrass P with periods ``(1, tau)`` via row-wise lattice summation.

    Independent of the theta series: each row of the period lattice is summed
    in closed form as ``pi^2 / sin^2``, and rows decay geometrically.
    """
    _check_tau(tau, cfg)

    def s(w: complex) -> complex:
        return (math.pi / cmath.sin(math.pi * w)) ** 2

    total = s(z) - math.pi**2 / 3.0
    for n in range(1, cfg.max_terms):
        row = s(z + n * tau) + s(z - n * tau) - 2 * s(n * tau)
        total += row
        if abs(row) < cfg.tol and n * tau.imag > abs(z.imag) + 1:
            return total
    raise TruncationError("Weierstrass row sum did not converge")


# ---------------------------------------------------------------------------
# level-k lattice theta series
# ---------------------------------------------------------------------------


@dataclass
class ThetaBasisElement:
    """``Theta_{lam}`` of level ``k``: a Gaussian sum over ``lam + k*M``.

    Evaluation takes the point in simple-root coordinates plus ``tau`` and the
    (usually zero) auxiliary coordinate ``u`` carrying the level factor
    ``exp(2 pi i k u)``.
    """

    datum: AffineRootDatum
    level: int
    lam_bar: Vec
    cfg: SeriesConfig = field(default_factory=SeriesConfig)

    def __post_init__(self):
        d = self.datum
        self._gram = np.array([[float(x) for x in row] for row in d.gram])
        self._mbasis = np.array(
            [[float(x) for x in b] for b in d.lattice_M.basis]
        )  # rows = basis vectors
        self._lam = np.array([float(x) for x in self.lam_bar])

    def _shifts(self, radius: int) -> np.ndarray:
        d = self.datum
        rng = np.arange(-radius, radius + 1)
        grids = np.meshgrid(*([rng] * d.l), indexing="ij")
        ns = np.stack([g.ravel() for g in grids], axis=-1)  # (npts, l)
        return self._lam[None, :] + self.level * ns @ self._mbasis

    def __call__(self, y, tau: complex, u: complex = 0.0):
        ys = np.atleast_2d(np.asarray(y, dtype=complex))  # (npts, l)
        k = self.level
        radius = 2
        prev = None
        while True:
            m = self._shifts(radius)  # (nm, l)
            my = (m @ self._gram) @ ys.T  # (nm, npts)
            mm = np.einsum("ij,jk,ik->i", m, self._gram, m)
            expo = 2j * math.pi * (my + (tau * mm / (2 * k))[:, None])
            terms = np.exp(expo)
            vals = terms.sum(axis=0) * cmath.exp(2j * math.pi * k * complex(u))
            if prev is not None and np.allclose(vals, prev, rtol=0, atol=self.cfg.tol * max(1.0, float(np.max(np.abs(vals))))):
                out = vals
                break
            prev = vals
            radius += 1
            if (2 * radius + 1) ** self.datum.l > self.cfg.max_terms * 100:
                raise TruncationError("lattice theta sum exceeded the term budget")
        y_in = np.asarray(y, dtype=complex)
        return out[0] if y_in.ndim == 1 else out


@dataclass
class SymmetrisedTheta:
    """A sum of :class:`ThetaBasisElement` over one finite Weyl orbit of classes."""

    members: tuple[ThetaBasisElement, ...]

    def __call__(self, y, tau: complex, u: complex = 0.0):
        return sum(f(y, tau, u) for f in self.members)


def theta_basis(datum: AffineRootDatum, level: int, cfg: SeriesConfig = DEFAULT_SERIES) -> list[ThetaBasisElement]:
    """One ``Theta_lam`` per class of the finite weight lattice mod ``level * M``."""
    km = datum.lattice_M.scaled(level)
    reps = quotient_representatives(datum.lattice_P, km)
    return [ThetaBasisElement(datum, level, r, cfg) for r in reps]


def _reduce_mod(lat: Lattice, v: Vec) -> Vec:
    c = lat.coords(v)
    floor = vec(math.floor(x) for x in c)
    shift = mat_vec(tuple(zip(*lat.basis, strict=True)), floor)
    return vec_sub(vec(v), shift)


def symmetrise_basis(
    datum: AffineRootDatum, basis: list[ThetaBasisElement]
) -> list[SymmetrisedTheta]:
    """Group a level-``k`` basis into finite-Weyl-orbit sums."""
    if not basis:
        return []
    level = basis[0].level
    km = datum.lattice_M.scaled(level)
    by_class = {_reduce_mod(km, b.lam_bar): b for b in basis}
    seen: set[Vec] = set()
    out = []
    for rep, elem in by_class.items():
        if rep in seen:
            continue
        orbit = set()
        for w in finite_weyl_group(datum):
            orbit.add(_reduce_mod(km, mat_vec(w, rep)))
        unknown = orbit - set(by_class)
        if unknown:
            raise ValueError("Weyl orbit leaves the basis classes; inconsistent input")
        seen |= orbit
        out.append(SymmetrisedTheta(tuple(by_class[o] for o in sorted(orbit))))
    return out


# ---------------------------------------------------------------------------
# Heisenberg-type quasi-periodicity
# ---------------------------------------------------------------------------


def heisenberg_shift(
    datum: AffineRootDatum,
    y: np.ndarray,
    tau: complex,
    u: complex,
    coweight_image: Vec | None = None,
    m_translate: Vec | None = None,
    central: complex = 0.0,
):
    """Transform an evaluation point by a lattice Heisenberg element.

    ``coweight_image`` is the form-image of the coroot-lattice part,
    ``m_translate`` an element of the translation lattice ``M``; ``central``
    is the central parameter ``a`` (the function then picks up ``exp(-k a)``).
    Returns the transformed ``(y, u)``; ``tau`` is untouched.
    """
    yv = np.asarray(y, dtype=complex).copy()
    un = complex(u)
    lam = m_translate
    if lam is not None:
        lamf = np.array([float(x) for x in lam])
        g = np.array([[float(x) for x in row] for row in datum.gram])
        un = un - complex(lamf @ g @ yv) + 0.5 * float(lamf @ g @ lamf) * tau
        yv = yv - tau * lamf
    if coweight_image is not None:
        vv = np.array([float(x) for x in coweight_image])
        yv = yv - vv
        if lam is not None:
            g = np.array([[float(x) for x in row] for row in datum.gram])
            lamf = np.array([float(x) for x in lam])
            un = un - 0.5 * float(lamf @ g @ vv)
    un = un - complex(central) / (2j * math.pi)
    return yv, un
