"""Scenario runner: property checks and the theta-span closure fit.

A :class:`ScenarioConfig` fixes the affine type, the level, the couplings
and the spectral mode; :func:`run_suite` runs any subset of the named
checks and returns one :class:`CheckReport` per check.  All residuals are
relative to a reported magnitude scale.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import operators as ops
from . import theta as th
from .exact import vec
from .root_system import AffineRootDatum, build_root_datum, coupling_dict
from .weyl import (
    ExtendedWeylElement,
    ReducedWord,
    bfs_length_table,
    finite_weyl_group,
    is_minuscule,
    quasi_minuscule_weight,
    reduced_word,
)

F = Fraction


class ConfigError(ValueError):
    """Bad scenario configuration (unknown check, conflicting mode, ...)."""


DEFAULT_TOLERANCES = {
    "yang_baxter": 1e-9,
    "unitarity": 1e-9,
    "reduced_word_independence": 1e-9,
    "commutativity": 1e-8,
    "weyl_invariance": 1e-8,
    "closed_form_equiv": 1e-9,
    "bar_representation": 1e-9,
    "lengths_vs_bfs": 0.0,
    "theta_quasiperiodicity": 1e-10,
    "theta_closure": 1e-7,
    "leading_term": 1e-9,
}

#: couplings used when the scenario does not name any: one generic rational
#: per length class, with pairwise coprime denominators.
def _default_mu(datum: AffineRootDatum) -> dict:
    return {k: F(2 + i, 5 + 2 * i) for i, k in enumerate(sorted(datum.class_keys))}


def _generic_xi(l: int) -> tuple:
    return tuple(F(2 * n + 1, 9 + 2 * n) for n in range(l))


@dataclass
class ScenarioConfig:
    type_label: str
    level_k: int = 1
    mu: dict | Fraction | None = None
    zeta: object = ops.BASIC
    mode: str = "invariant"  # invariant | generic | manual
    tau: complex = 0.8j + 0.05
    sample_points: int = 6
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    kappa: Fraction | None = None  # manual mode only
    xi: tuple | None = None  # manual mode only
    series: th.SeriesConfig = field(default_factory=th.SeriesConfig)

    def __post_init__(self):
        if self.mode not in ("invariant", "generic", "manual"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.mode != "manual" and (self.kappa is not None or self.xi is not None):
            raise ConfigError("kappa/xi overrides require manual mode")
        if self.mode == "manual" and (self.kappa is None or self.xi is None):
            raise ConfigError("manual mode needs both kappa and xi")
        if self.level_k < 1:
            raise ConfigError("level must be a positive integer")
        if self.tau.imag < self.series.im_tau_floor:
            raise ConfigError("Im tau below the series floor")

    def tolerance(self, check: str) -> float:
        return self.tolerances.get(check, DEFAULT_TOLERANCES[check])


@dataclass
class CheckReport:
    name: str
    status: str  # pass | fail | skipped
    residual: float
    scale: float
    samples: int
    seconds: float
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "residual": self.residual,
            "scale": self.scale,
            "samples": self.samples,
            "seconds": self.seconds,
            "diagnostics": self.diagnostics,
        }


# ---------------------------------------------------------------------------
# scenario plumbing
# ---------------------------------------------------------------------------


class _Scenario:
    """Resolved per-run state: datum, context, rng, sample generator."""

    def __init__(self, sc: ScenarioConfig):
        self.config = sc
        self.datum = build_root_datum(sc.type_label)
        d = self.datum
        mu = sc.mu
        if mu is None:
            mu = _default_mu(d)
        elif not isinstance(mu, dict):
            mu = {k: F(mu) for k in d.class_keys}
        self.mu = coupling_dict(d, mu)
        if sc.mode == "invariant":
            self.xi = tuple(-x for x in d.rho_mu(self.mu))
            self.kappa = d.h_vee_mu(self.mu) / sc.level_k
        elif sc.mode == "generic":
            self.xi = _generic_xi(d.l)
            self.kappa = F(3, 7)
        else:
            self.xi = vec(sc.xi)
            self.kappa = F(sc.kappa)
        self.ctx = ops.make_context(
            d, sc.tau, mu, self.xi, kappa=self.kappa, zeta=sc.zeta, cfg=sc.series
        )
        self.rng = np.random.default_rng(sc.seed)

    def context(self, xi=None, kappa=None) -> ops.EvalContext:
        if xi is None and kappa is None:
            return self.ctx
        d = self.datum
        return ops.make_context(
            d,
            self.config.tau,
            dict(self.mu),
            self.xi if xi is None else xi,
            kappa=self.kappa if kappa is None else kappa,
            zeta=self.config.zeta,
            cfg=self.config.series,
        )

    def points(self, n: int | None = None, margin: float = 0.05) -> np.ndarray:
        """Random sample points, rejecting anything within ``margin`` of a
        ``theta_1`` zero hyperplane of any positive root."""
        d, sc = self.datum, self.config
        n = sc.sample_points if n is None else n
        gram = self.ctx.gram_f
        bars = np.array([[float(x) for x in b] for b in d.pos_roots])
        out = np.empty((n, d.l), dtype=complex)
        got = 0
        while got < n:
            ys = self.rng.normal(size=(4 * n, d.l)) * 0.35 + 1j * (
                self.rng.normal(size=(4 * n, d.l)) * 0.12
            )
            z = ys @ gram @ bars.T  # (batch, nroots)
            with np.errstate(over="ignore", invalid="ignore"):
                vals = th.jacobi_theta(1, z, sc.tau, sc.series)
            # NaN from an overflowing outlier compares False and is rejected
            good = np.all(np.abs(vals) > margin, axis=1)
            for row in ys[good]:
                if got == n:
                    break
                out[got] = row
                got += 1
        return out

    def test_function(self):
        d = self.datum
        v = self.rng.normal(size=d.l) + 0.3j * self.rng.normal(size=d.l)

        def f(ys):
            return np.exp(np.atleast_2d(np.asarray(ys, dtype=complex)) @ v)

        return f

    def symmetric_test_function(self):
        """A finite-Weyl-invariant exponential sum."""
        d = self.datum
        v = self.rng.normal(size=d.l) + 0.3j * self.rng.normal(size=d.l)
        gram = self.ctx.gram_f
        mats = [
            np.array([[float(x) for x in row] for row in w])
            for w in finite_weyl_group(d)
        ]

        def f(ys):
            ys = np.atleast_2d(np.asarray(ys, dtype=complex))
            return sum(np.exp(ys @ w.T @ gram @ v) for w in mats)

        return f


def _coeff_diff(c1: dict, c2: dict) -> tuple[float, float]:
    """Worst absolute gap between two collected-coefficient dicts, plus the
    magnitude scale of the larger side."""
    err, scale = 0.0, 0.0
    for g in set(c1) | set(c2):
        a = np.asarray(c1.get(g, 0.0))
        b = np.asarray(c2.get(g, 0.0))
        gap = float(np.max(np.abs(a - b)))
        if not math.isfinite(gap):
            return math.inf, 1.0
        err = max(err, gap)
        scale = max(
            scale, float(np.max(np.abs(a))), float(np.max(np.abs(b)))
        )
    return err, max(scale, 1e-300)


def _braid_order(d: AffineRootDatum, i: int, j: int) -> int:
    a = d.coroot_pair(d.simple_root(j).bar, d.simple_root(i).bar)
    b = d.coroot_pair(d.simple_root(i).bar, d.simple_root(j).bar)
    # product 4 between two simple roots means no finite braid relation
    return {0: 2, 1: 3, 2: 4, 3: 6, 4: 0}[int(a * b)]


# ---------------------------------------------------------------------------
# individual checks
# ---------------------------------------------------------------------------


def _check_yang_baxter(s: _Scenario) -> tuple[float, float, int, dict]:
    d, ctx = s.datum, s.ctx
    ys = s.points()
    ident = ExtendedWeylElement.identity(d)
    worst, scale, n = 0.0, 1e-300, 0
    diag = {}
    for i in range(d.l + 1):
        for j in range(i + 1, d.l + 1):
            m = _braid_order(d, i, j)
            if m == 0:
                continue
            w1 = ReducedWord(d, tuple((i if k % 2 == 0 else j) for k in range(m)), ident)
            w2 = ReducedWord(d, tuple((j if k % 2 == 0 else i) for k in range(m)), ident)
            c1 = ops.operator_from_word(d, w1).collect(ys, ctx)
            c2 = ops.operator_from_word(d, w2).collect(ys, ctx)
            err, sc = _coeff_diff(c1, c2)
            n += ys.shape[0]
            if err / sc > worst / scale:
                worst, scale = err, sc
                diag = {"pair": [i, j], "order": m, "terms": len(set(c1) | set(c2))}
    return worst, scale, n, diag


def _check_unitarity(s: _Scenario) -> tuple[float, float, int, dict]:
    from .root_system import AffineRoot

    d, ctx = s.datum, s.ctx
    ys = s.points()
    ident = ExtendedWeylElement.identity(d)
    bars = [d.pos_roots[0], d.pos_roots[-1]]
    if d.is_a_even_twisted:
        bars += list(d.half_root_bars()[:1])
    worst, scale, diag = 0.0, 1e-300, {}
    for bar in bars:
        c = F(0) if d.is_finite_root(bar) else F(1, 2)
        root = AffineRoot(bar, c)
        neg = AffineRoot(tuple(-x for x in bar), -c)
        co = (ops.r_matrix(d, root) * ops.r_matrix(d, neg)).collect(ys, ctx)
        u = ops.unitarity_scalar(ctx, bar)
        err = float(np.max(np.abs(co[ident] - u)))
        for g, cf in co.items():
            if g != ident:
                err = max(err, float(np.max(np.abs(cf))))
        sc = max(abs(u), 1.0)
        if err / sc > worst / scale:
            worst, scale = err, sc
            diag = {"class": d.class_names[d.class_of(bar)], "u": [u.real, u.imag]}
    return worst, scale, len(bars) * ys.shape[0], diag


def _all_reduced_words(d: AffineRootDatum, word: ReducedWord, limit: int = 4):
    """Up to ``limit`` distinct reduced words for the element of ``word``,
    found by depth-first search over left descents."""
    target = word.element()
    out: list[ReducedWord] = []

    def walk(cur, prefix):
        if len(out) >= limit:
            return
        if cur.length() == 0:
            out.append(ReducedWord(d, tuple(prefix), cur))
            return
        for i in range(d.l + 1):
            if cur._sends_negative(d.simple_root(i)):
                walk(ExtendedWeylElement.simple(d, i) * cur, prefix + [i])
                if len(out) >= limit:
                    return

    walk(target, [])
    # every path strips down to the same length-zero component
    return [w for w in out if w.element() == target]


def _check_reduced_word_independence(s: _Scenario) -> tuple[float, float, int, dict]:
    d, ctx = s.datum, s.ctx
    ys = s.points()
    worst, scale, n, nwords = 0.0, 1e-300, 0, 0
    lams = [tuple(-x for x in d.weight_basis[i]) for i in range(min(d.l, 2))]
    if d.l >= 2:
        lams.append(tuple(a + b for a, b in zip(lams[0], lams[1])))
    for lam in lams:
        w = reduced_word(ExtendedWeylElement.translation(d, lam))
        base = ops.operator_from_word(d, w).collect(ys, ctx)
        for alt in _all_reduced_words(d, w)[1:]:
            err, sc = _coeff_diff(base, ops.operator_from_word(d, alt).collect(ys, ctx))
            nwords += 1
            n += ys.shape[0]
            if err / sc > worst / scale:
                worst, scale = err, sc
    return worst, scale, n, {"alternative_words": nwords}


def _check_commutativity(s: _Scenario) -> tuple[float, float, int, dict]:
    d, ctx = s.datum, s.ctx
    ys = s.points()
    l1 = tuple(-x for x in d.weight_basis[0])
    l2 = tuple(-x for x in d.weight_basis[min(1, d.l - 1)])
    y1 = ops.y_operator(d, l1)
    y2 = ops.y_operator(d, l2)
    y12 = ops.y_operator(d, tuple(a + b for a, b in zip(l1, l2)))
    cab = (y1 * y2).collect(ys, ctx)
    cba = (y2 * y1).collect(ys, ctx)
    cprod = y12.collect(ys, ctx)
    e1, s1 = _coeff_diff(cab, cba)
    e2, s2 = _coeff_diff(cab, cprod)
    worst = max(e1 / s1, e2 / s2)
    return worst, 1.0, 2 * ys.shape[0], {"terms": len(cab)}


def _check_weyl_invariance(s: _Scenario) -> tuple[float, float, int, dict]:
    d, sc = s.datum, s.config
    basis = th.symmetrise_basis(d, th.theta_basis(d, sc.level_k, sc.series))
    f = basis[0]
    lam = tuple(-x for x in d.weight_basis[0])
    yop = ops.y_operator(d, lam)
    ys = s.points()
    ref = yop.apply(lambda yy: f(yy, sc.tau), ys, s.ctx)
    scale = float(np.max(np.abs(ref)))
    worst = 0.0
    nw = 0
    for w in finite_weyl_group(d):
        wm = np.array([[float(x) for x in row] for row in w])
        img = yop.apply(lambda yy: f(yy, sc.tau), ys @ wm.T, s.ctx)
        worst = max(worst, float(np.max(np.abs(img - ref))))
        nw += 1
    return worst, max(scale, 1e-300), nw * ys.shape[0], {"group_order": nw}


def _check_closed_form_equiv(s: _Scenario) -> tuple[float, float, int, dict]:
    d = s.datum
    # the closed forms hold on the invariant spectral line xi = -rho_mu
    ctx = s.context(xi=tuple(-x for x in d.rho_mu(s.mu)))
    # the equivalence is an identity on finite-Weyl-invariant functions
    f = s.symmetric_test_function()
    ys = s.points()
    worst, n, diag = 0.0, 0, {"minuscule": 0, "quasi_minuscule": 0}
    for i in range(d.l):
        lam = tuple(-x for x in d.weight_basis[i])
        if not is_minuscule(d, lam):
            continue
        a = ops.y_operator(d, lam).apply(f, ys, ctx)
        b = ops.minuscule_closed_form(d, lam).apply(f, ys, ctx)
        worst = max(worst, float(np.max(np.abs(a - b)) / np.max(np.abs(a))))
        diag["minuscule"] += 1
        n += ys.shape[0]
    nth, _ = quasi_minuscule_weight(d)
    lam = tuple(-x for x in nth)
    a = ops.y_operator(d, lam).apply(f, ys, ctx)
    b = ops.quasi_minuscule_closed_form(d).apply(f, ys, ctx)
    worst = max(worst, float(np.max(np.abs(a - b)) / np.max(np.abs(a))))
    diag["quasi_minuscule"] = 1
    return worst, 1.0, n + ys.shape[0], diag


def _check_bar_representation(s: _Scenario) -> tuple[float, float, int, dict]:
    d, ctx = s.datum, s.ctx
    ys = s.points()
    lam = tuple(-x for x in d.weight_basis[0])
    ybar = ops.bar_y_operator(d, lam, dict(s.mu), s.xi)
    yhat = ops.y_operator(d, lam)
    Xi = ops.capital_xi(d, dict(s.mu), s.xi)
    conj = (
        ops.translation_operator(d, tuple(-x for x in Xi))
        * yhat
        * ops.translation_operator(d, Xi)
    )
    err, sc = _coeff_diff(ybar.collect(ys, ctx), conj.collect(ys, ctx))
    diag = {}
    if all(x + r == 0 for x, r in zip(s.xi, d.rho_mu(s.mu))):
        e2, s2 = _coeff_diff(ybar.collect(ys, ctx), yhat.collect(ys, ctx))
        diag["collapse_residual"] = e2 / s2
        err = max(err, e2)
        sc = max(sc, s2)
    return err, sc, ys.shape[0], diag


def _check_lengths_vs_bfs(s: _Scenario, max_len: int = 6) -> tuple[float, float, int, dict]:
    d = s.datum
    table = bfs_length_table(d, max_len)
    bad = 0
    for elem, ln in table.items():
        if elem.length() != ln:
            bad += 1
            continue
        if len(reduced_word(elem).letters) != ln:
            bad += 1
    return float(bad), 1.0, len(table), {"max_len": max_len, "elements": len(table)}


def _check_theta_quasiperiodicity(s: _Scenario) -> tuple[float, float, int, dict]:
    d, sc = s.datum, s.config
    tau = sc.tau
    cfg = sc.series
    worst = 0.0
    # theta_1'(0) against the eta-cube normalisation
    lhs = th.theta1_prime_zero_classical(tau, cfg)
    rhs = 2.0 * np.pi * th.dedekind_eta(tau, cfg) ** 3
    worst = max(worst, abs(lhs - rhs) / abs(rhs))
    # lattice quasi-periodicity of the level-k sums via the Heisenberg shift
    basis = th.theta_basis(d, sc.level_k, cfg)
    f = basis[0]
    ys = s.points(3)
    mvec = d.lattice_M.basis[0]
    for y in ys:
        base = f(y, tau, 0.0)
        y2, u2 = th.heisenberg_shift(d, y, tau, 0.0, m_translate=mvec)
        worst = max(worst, abs(f(y2, tau, u2) - base) / max(abs(base), 1e-300))
    # wp0 is even and elliptic
    z = 0.31 + 0.07j
    g = float(d.gamma_of(d.pos_roots[0]))
    worst = max(worst, abs(th.wp0(z, g, tau, cfg) - th.wp0(-z, g, tau, cfg)))
    worst = max(
        worst, abs(th.wp0(z + g * tau, g, tau, cfg) - th.wp0(z, g, tau, cfg))
    )
    return worst, 1.0, 3 * len(ys) + 2, {"eta_cube_residual": abs(lhs - rhs) / abs(rhs)}


def _check_theta_closure(s: _Scenario) -> tuple[float, float, int, dict]:
    d, sc = s.datum, s.config
    if sc.mode == "generic":
        # manual mode is allowed: that is how the kappa negative control runs
        raise ConfigError("theta closure needs invariant or manual mode")
    basis = th.symmetrise_basis(d, th.theta_basis(d, sc.level_k, sc.series))
    dim = len(basis)
    npts = max(3 * dim + 3, sc.sample_points)
    lam = tuple(-x for x in d.weight_basis[0])
    yop = ops.y_operator(d, lam)
    for attempt in range(3):
        ys = s.points(npts)
        B = np.stack([b(ys, sc.tau) for b in basis], axis=1)
        if np.linalg.matrix_rank(B, tol=1e-10 * np.max(np.abs(B))) == dim:
            break
    else:
        raise ConfigError("sample matrix stayed rank-deficient after retries")
    col = np.max(np.abs(B), axis=0)
    G = np.stack(
        [yop.apply(lambda yy, b=b: b(yy, sc.tau), ys, s.ctx) for b in basis], axis=1
    )
    C, *_ = np.linalg.lstsq(B / col, G, rcond=None)
    resid = float(np.linalg.norm((B / col) @ C - G) / max(np.linalg.norm(G), 1e-300))
    fitted = (C.T / col).T
    return resid, 1.0, npts, {
        "dimension": dim,
        "fitted_matrix": [[ [c.real, c.imag] for c in row] for row in fitted],
    }


def _check_leading_term(s: _Scenario) -> tuple[float, float, int, dict]:
    d, ctx = s.datum, s.ctx
    ys = s.points()
    lam = tuple(-x for x in d.weight_basis[0])
    co = ops.y_operator(d, lam).collect(ys, ctx)
    telem = ExtendedWeylElement.translation(d, lam)
    lead = co.get(telem)
    if lead is None:
        return 1.0, 1.0, ys.shape[0], {"error": "pure translation term missing"}
    ref = ops.leading_term_coefficient(ctx, lam)(ys)
    err = float(np.max(np.abs(lead - ref)))
    scale = float(np.max(np.abs(ref)))
    return err, max(scale, 1e-300), ys.shape[0], {}


CHECKS = {
    "yang_baxter": _check_yang_baxter,
    "unitarity": _check_unitarity,
    "reduced_word_independence": _check_reduced_word_independence,
    "commutativity": _check_commutativity,
    "weyl_invariance": _check_weyl_invariance,
    "closed_form_equiv": _check_closed_form_equiv,
    "bar_representation": _check_bar_representation,
    "lengths_vs_bfs": _check_lengths_vs_bfs,
    "theta_quasiperiodicity": _check_theta_quasiperiodicity,
    "theta_closure": _check_theta_closure,
    "leading_term": _check_leading_term,
}


def run_theta_closure(config: ScenarioConfig) -> CheckReport:
    return run_suite(config, ["theta_closure"])[0]


def run_suite(config: ScenarioConfig, checks: list[str] | None = None) -> list[CheckReport]:
    if checks is None:
        checks = list(CHECKS)
    unknown = [c for c in checks if c not in CHECKS]
    if unknown:
        raise ConfigError(f"unknown checks: {', '.join(unknown)}")
    reports = []
    for name in checks:
        scenario = _Scenario(config)  # fresh rng per check: determinism
        t0 = time.perf_counter()
        try:
            resid, scale, n, diag = CHECKS[name](scenario)
            status = "pass" if resid / scale <= config.tolerance(name) else "fail"
            reports.append(
                CheckReport(
                    name=name,
                    status=status,
                    residual=resid / scale,
                    scale=scale,
                    samples=n,
                    seconds=round(time.perf_counter() - t0, 6),
                    diagnostics=diag,
                )
            )
        except ConfigError as exc:
            reports.append(
                CheckReport(
                    name=name,
                    status="skipped",
                    residual=float("nan"),
                    scale=0.0,
                    samples=0,
                    seconds=round(time.perf_counter() - t0, 6),
                    diagnostics={"reason": str(exc)},
                )
            )
    return reports


def emit_report(
    reports: list[CheckReport], fmt: str = "text", scenario: ScenarioConfig | None = None
) -> str:
    if fmt == "json":
        payload = {
            "scenario": None
            if scenario is None
            else {
                "type": scenario.type_label,
                "level": scenario.level_k,
                "mode": scenario.mode,
                "tau": [scenario.tau.real, scenario.tau.imag],
                "seed": scenario.seed,
                "sample_points": scenario.sample_points,
            },
            "checks": [r.to_dict() for r in reports],
        }
        return json.dumps(payload, sort_keys=True, indent=2)
    if fmt != "text":
        raise ConfigError(f"unknown report format {fmt!r}")
    lines = []
    if scenario is not None:
        lines.append(
            f"scenario: {scenario.type_label} level={scenario.level_k} "
            f"mode={scenario.mode} seed={scenario.seed}"
        )
    for r in reports:
        lines.append(
            f"{r.name:28s} {r.status:7s} residual={r.residual:.3e} "
            f"samples={r.samples} t={r.seconds:.2f}s"
        )
    return "\n".join(lines)
