"""One check per verified identity.

Each ``check_*`` function evaluates the two sides of one identity at
user-chosen parameters and returns a :class:`CheckReport`.  Where a check
bundles closely related sub-identities (stated by the same theorem), the
worst sub-error is folded into the report, so ``passed`` is honest for
the whole bundle; the notes field itemizes the pieces.

Unless stated otherwise integrals run at "big" contour base points
xi >= m + 5; the integrators escalate to high-precision summation
automatically whenever the oscillatory cancellation exceeds the
binary64 budget (see :mod:`qtrace.quad`).
"""

from __future__ import annotations

import math
import time

import numpy as np

from .errors import DomainError, NearPole
from .qnum import (QContext, character, gaussian_weight, qdim,
                   qp_factory, theta_gamma, weyl_denominator)
from .quad import (LineContour, RealContour, TorusContour,
                   integrate_gaussian_line, integrate_real_line,
                   integrate_torus, line_contour_for, residue_at)
from .report import CheckReport, make_report
from .tracefn import (F_closed, F_findim, F_ratio, F_term, Psi_tilde,
                      Q_closed_inv, TraceFunctionParams, psi_from_closed,
                      resonance_pairs)
from . import uqsl2

_MIN_POLE_DIST = 0.5


def _timer():
    t0 = time.perf_counter()
    return lambda: (time.perf_counter() - t0) * 1e3


def _fold(err: float, sub_tol: float, main_tol: float) -> float:
    """Fold a sub-identity error with its own tolerance into a report whose
    main tolerance differs: failing the sub-tolerance must fail the report."""
    return err if err <= sub_tol else max(err, 2.0 * main_tol)


def _default_xi(m: int) -> float:
    return float(m + 7)


def _check_contour(par: TraceFunctionParams, xi: float):
    for k in range(1, par.m + 1):
        if min(abs(xi - k), abs(xi + k)) < _MIN_POLE_DIST:
            raise NearPole(f"contour xi={xi} within {_MIN_POLE_DIST} of pole +-{k}")


def _xi_note(m: int, xi: float) -> str:
    return "" if xi >= m + 5 else f"warning: xi={xi:g} below the recommended m+5; "


def _heat_bound(ctx: QContext, m: int, xi: float, mu: float, nu: float) -> float:
    """Crude magnitude bound for F(mu,-lam) F(lam,nu) q^-(lam,lam) on C_xi,
    used only to size the truncated line contour."""
    expo = ctx.L * xi * xi / 2.0 - (abs(mu) + abs(nu) + 2 * m + 2) * xi * math.log(ctx.q)
    return math.exp(min(expo, 600.0)) * 1e3


# ---------------------------------------------------------------------------
# orthogonality and heat, Verma traces
# ---------------------------------------------------------------------------

def check_orthogonality(ctx: QContext, m: int, mu: float, nu: float,
                        xi: float | None = None, n: int = 256,
                        tolerance: float = 1e-9) -> CheckReport:
    """Torus orthogonality: for mu - nu in Z and big xi,

        int_(C_xi/kappa Qv) F(mu, -lam) F(lam, nu) dlam
            = delta_(mu,nu) Qinv(mu).
    """
    ms = _timer()
    if abs((mu - nu) - round(mu - nu)) > 1e-9:
        raise DomainError("orthogonality needs mu - nu in the weight lattice Z")
    par = TraceFunctionParams(ctx, m)
    xi = _default_xi(m) if xi is None else xi
    _check_contour(par, xi)
    diagonal = abs(mu - nu) < 1e-12
    delta = int(round(mu - nu))

    def f(lam, use_mp=False):
        # q^(lam (mu-nu)) carried with the exact integer exponent so the
        # integrand is exactly lattice periodic
        qp = qp_factory(ctx, use_mp)
        return qp(np.multiply(lam, delta) if not use_mp else lam * delta) \
            * F_ratio(par, mu, -lam, use_mp) * F_ratio(par, lam, nu, use_mp)

    rhs = Q_closed_inv(par, mu) if diagonal else 0.0
    budget = tolerance * max(abs(rhs), 1.0) * 1e-2
    lhs = integrate_torus(ctx, f, TorusContour(xi, n), abs_budget=budget)
    notes = _xi_note(m, xi) + ("diagonal" if diagonal else "off-diagonal")
    return make_report("orthogonality", {"q": ctx.q, "m": m, "mu": mu, "nu": nu,
                                         "xi": xi, "n": n},
                       lhs, rhs, tolerance, ms(), notes)


def check_heat(ctx: QContext, m: int, mu: float, nu: float,
               xi: float | None = None, line_n: int = 2048,
               y_max: float | None = None, tolerance: float = 1e-7,
               witness_terms: bool = False) -> CheckReport:
    """Gaussian-weighted heat identity on the full line C_xi:

        int_(C_xi) F(mu, -lam) F(lam, nu) q^-(lam,lam) dlam
            = q^((mu,mu) + (nu,nu)) F(mu, nu).

    With ``witness_terms`` the notes also record how far a single
    summand-pair integral sits from its elementary Gaussian estimate
    (the sum collapses only through cancellation between the pairs).
    """
    ms = _timer()
    par = TraceFunctionParams(ctx, m)
    qp = qp_factory(ctx)
    xi = _default_xi(m) if xi is None else xi
    _check_contour(par, xi)
    bound = _heat_bound(ctx, m, xi, mu, nu)
    if y_max is None:
        c = line_contour_for(ctx, xi, bound, 1e-12, line_n)
    else:
        c = LineContour(xi, y_max, line_n)
        c.check_tail(ctx, bound, 1e-10)

    def f(lam, use_mp=False):
        return F_closed(par, mu, -lam, use_mp) * F_closed(par, lam, nu, use_mp) \
            * gaussian_weight(ctx, lam, use_mp)

    rhs = complex(qp((mu * mu + nu * nu) / 2.0)) * F_closed(par, mu, nu)
    budget = tolerance * abs(rhs) * 1e-2
    lhs = integrate_gaussian_line(ctx, f, c, abs_budget=budget)
    notes = _xi_note(m, xi) + f"y_max={c.y_max:.1f}"
    if witness_terms and m >= 1:
        gap = heat_pair_witness(ctx, m, mu, nu, xi, line_n)
        notes += f"; pair(1,1) vs elementary Gaussian estimate: gap {gap:.3f}"
    return make_report("heat", {"q": ctx.q, "m": m, "mu": mu, "nu": nu,
                                "xi": xi, "n": line_n},
                       lhs, rhs, tolerance, ms(), notes)


def heat_pair_witness(ctx: QContext, m: int, mu: float, nu: float,
                      xi: float | None = None, line_n: int = 2048) -> float:
    """Gap between the single summand-pair integral (l, l') = (1, 1) of
    the heat integrand and the elementary Gaussian value it would have if
    its lam-rational factors were constant (frozen at the Gaussian
    saddle).  A sizable gap witnesses that the individual pair integrals
    are non-elementary and the simple total arises only from cancellation
    between the (m+1)^2 pairs.

    pair(lam) = N(lam) q^(a lam - lam^2/2) with a = mu - nu - 2 and N the
    rational part; were N constant, the normalized integral would equal
    N q^(a^2/2) = pair(a) exactly.
    """
    if m < 1:
        raise DomainError("the pair witness needs m >= 1")
    par = TraceFunctionParams(ctx, m)
    xi = _default_xi(m) if xi is None else xi
    c = line_contour_for(ctx, xi, _heat_bound(ctx, m, xi, mu, nu), 1e-12, line_n)

    def pair(lam, use_mp=False):
        return F_term(par, 1, mu, -lam, use_mp) * F_term(par, 1, lam, nu, use_mp) \
            * gaussian_weight(ctx, lam, use_mp)

    a = mu - nu - 2.0
    elem = complex(pair(np.complex128(a)))
    val = integrate_gaussian_line(ctx, pair, c, abs_budget=abs(elem) * 1e-7)
    return abs(val - elem) / max(abs(val), abs(elem))


# ---------------------------------------------------------------------------
# finite-dimensional orthogonality and heat
# ---------------------------------------------------------------------------

def _findim_F_evaluator(ctx: QContext, par: TraceFunctionParams, nu_anti: int,
                        module=None):
    """Closure for F_(nu_anti)(lam) = dd(lam) Psi_(-nu_anti-1)(lam) Qinv(nu_anti)
    with the ladder coefficients cached across quadrature nodes."""
    psi = uqsl2.findim_psi_evaluator(ctx, -nu_anti - 1, par.m, module=module)

    def evaluate(lam, use_mp: bool = False):
        return weyl_denominator(ctx, lam, use_mp) * psi(lam, use_mp) \
            * Q_closed_inv(par, nu_anti, use_mp)

    return evaluate


def check_orthogonality_findim(ctx: QContext, m: int, mu: int, nu: int,
                               xi: float | None = None, n: int = 256,
                               tolerance: float = 1e-9) -> CheckReport:
    """Finite-dimensional orthogonality for dominant integral mu, nu >= m:

    trace form   (1/2) int dd(lam) dd(-lam) (Psi_mu(lam), Psi*_nu(-lam)) dlam
                    = delta_(mu,nu) (Q_V(mu) v, v*)       [first principles]
    F form       (1/2) int F*_(-nu-1)(-lam) F_(-mu-1)(lam) dlam
                    = delta_(mu,nu) Qinv(-mu-1).
    """
    ms = _timer()
    if mu != int(mu) or nu != int(nu) or min(mu, nu) < m:
        raise DomainError("need dominant integral mu, nu >= m")
    mu, nu = int(mu), int(nu)
    par = TraceFunctionParams(ctx, m)
    xi = _default_xi(m) if xi is None else xi
    _check_contour(par, xi)
    V = uqsl2.irreducible(ctx, 2 * m)
    Vs = uqsl2.right_dual(ctx, V)
    diagonal = mu == nu
    psi_mu = uqsl2.findim_psi_evaluator(ctx, mu, m)
    psi_nu = uqsl2.findim_psi_evaluator(ctx, nu, m, module=Vs)

    def f_psi(lam, use_mp=False):
        d = weyl_denominator(ctx, lam, use_mp) * weyl_denominator(ctx, -lam, use_mp)
        return d * psi_mu(lam, use_mp) * psi_nu(-lam, use_mp) / 2

    rhs_psi = uqsl2.q_operator(ctx, m, mu) if diagonal else 0.0
    budget = tolerance * max(abs(rhs_psi), 1.0) * 1e-2
    lhs_psi = integrate_torus(ctx, f_psi, TorusContour(xi, n), abs_budget=budget)
    err_psi = abs(lhs_psi - rhs_psi) / max(abs(rhs_psi), 1.0)

    F_mu = _findim_F_evaluator(ctx, par, -mu - 1)
    F_nu = _findim_F_evaluator(ctx, par, -nu - 1, module=Vs)

    def f_F(lam, use_mp=False):
        return F_nu(-lam, use_mp) * F_mu(lam, use_mp) / 2

    rhs_F = Q_closed_inv(par, -mu - 1) if diagonal else 0.0
    budget = tolerance * max(abs(rhs_F), 1.0) * 1e-2
    lhs_F = integrate_torus(ctx, f_F, TorusContour(xi, n), abs_budget=budget)
    notes = (f"trace-form err {err_psi:.2e}; "
             + ("diagonal" if diagonal else "off-diagonal"))
    return make_report("orthogonality-findim",
                       {"q": ctx.q, "m": m, "mu": mu, "nu": nu, "xi": xi, "n": n},
                       lhs_F, rhs_F, tolerance, ms(), notes, extra_err=err_psi)


def check_heat_findim(ctx: QContext, m: int, mu: int, nu: int,
                      xi: float | None = None, line_n: int = 2048,
                      tolerance: float = 1e-7,
                      corollary_tolerance: float = 1e-9) -> CheckReport:
    """Finite-dimensional heat identity (q-Gaussian character integral)
    for dominant integral mu, nu >= m, in both the trace form

        (1/2) int dd (Psi_mu(lam), Psi*_nu(-lam)) q^-(lam,lam) dlam
          = dd(-mu-1) q^(((mu+1)^2+(nu+1)^2)/2) (Q(mu) v, Psi*_nu(-mu-1))

    and the F form with anti-dominant labels mt = -mu-1, nt = -nu-1

        (1/2) int F*_nt(-lam) F_mt(lam) q^-(lam,lam) dlam
          = q^((mt,mt)+(nt,nt)) F*_nt(mt),

    plus the evaluation-symmetry corollary F*_nt(mt) = F_mt(nt).
    """
    ms = _timer()
    if mu != int(mu) or nu != int(nu) or min(mu, nu) < m:
        raise DomainError("need dominant integral mu, nu >= m")
    mu, nu = int(mu), int(nu)
    par = TraceFunctionParams(ctx, m)
    qp = qp_factory(ctx)
    xi = _default_xi(m) if xi is None else xi
    _check_contour(par, xi)
    V = uqsl2.irreducible(ctx, 2 * m)
    Vs = uqsl2.right_dual(ctx, V)
    bound = math.exp(ctx.L * xi * xi / 2.0) * ctx.q ** (-(mu + nu + 2 * m + 2) * xi) * 1e3
    c = line_contour_for(ctx, xi, bound, 1e-12, line_n)
    psi_mu = uqsl2.findim_psi_evaluator(ctx, mu, m)
    psi_nu = uqsl2.findim_psi_evaluator(ctx, nu, m, module=Vs)

    def f_psi(lam, use_mp=False):
        d = weyl_denominator(ctx, lam, use_mp) * weyl_denominator(ctx, -lam, use_mp)
        return d * psi_mu(lam, use_mp) * psi_nu(-lam, use_mp) \
            * gaussian_weight(ctx, lam, use_mp) / 2

    rhs_psi = complex(weyl_denominator(ctx, -mu - 1.0)) \
        * complex(qp(((mu + 1) ** 2 + (nu + 1) ** 2) / 2.0)) \
        * uqsl2.q_operator(ctx, m, mu) \
        * complex(psi_nu(-mu - 1.0))
    lhs_psi = integrate_gaussian_line(ctx, f_psi, c,
                                      abs_budget=abs(rhs_psi) * tolerance * 1e-2)
    err_psi = abs(lhs_psi - rhs_psi) / abs(rhs_psi)

    mt, nt = -mu - 1, -nu - 1
    F_mu = _findim_F_evaluator(ctx, par, mt)
    F_nu = _findim_F_evaluator(ctx, par, nt, module=Vs)

    def f_F(lam, use_mp=False):
        return F_nu(-lam, use_mp) * F_mu(lam, use_mp) \
            * gaussian_weight(ctx, lam, use_mp) / 2

    rhs_F = complex(qp((mt * mt + nt * nt) / 2.0)) * complex(F_nu(complex(mt)))
    lhs_F = integrate_gaussian_line(ctx, f_F, c,
                                    abs_budget=abs(rhs_F) * tolerance * 1e-2)

    cor_l = complex(F_nu(complex(mt)))
    cor_r = complex(F_mu(complex(nt)))
    err_cor = abs(cor_l - cor_r) / max(abs(cor_l), abs(cor_r))
    notes = (f"trace-form err {err_psi:.2e}; corollary err {err_cor:.2e}; "
             f"y_max={c.y_max:.1f}")
    extra = max(err_psi, _fold(err_cor, corollary_tolerance, tolerance))
    return make_report("heat-findim",
                       {"q": ctx.q, "m": m, "mu": mu, "nu": nu, "xi": xi, "n": line_n},
                       lhs_F, rhs_F, tolerance, ms(), notes, extra_err=extra)


# ---------------------------------------------------------------------------
# theta / Kostant
# ---------------------------------------------------------------------------

def check_theta_lemma(ctx: QContext, xi: float = 1.5, n_poly: int = 10,
                      torus_n: int = 128, tolerance: float = 1e-9,
                      seed: int = 5) -> CheckReport:
    """Unfolding identity: for kappa Qv periodic f,

        int_(C_xi) f(lam) q^-(lam,lam) dlam
            = int_(C_xi/kappa Qv) f(lam) gamma(lam) dlam,

    checked on ``n_poly`` random trigonometric polynomials."""
    ms = _timer()
    rng = np.random.default_rng(seed)
    worst = 0.0
    first = (0.0, 0.0)
    for _ in range(n_poly):
        degs = rng.integers(-4, 5, size=3)
        coeffs = rng.normal(size=3) + 1j * rng.normal(size=3)

        def f(lam, use_mp=False):
            qp = qp_factory(ctx, use_mp)
            return sum(cf * qp(int(b) * lam) for b, cf in zip(degs, coeffs))

        def f_line(lam, use_mp=False):
            return f(lam, use_mp) * gaussian_weight(ctx, lam, use_mp)

        def f_torus(lam, use_mp=False):
            return f(lam, use_mp) * theta_gamma(ctx, lam, use_mp=use_mp)

        bound = math.exp(ctx.L * xi * xi / 2.0) * ctx.q ** (-4 * xi - 4) * 10
        c = line_contour_for(ctx, xi, bound)
        lhs = integrate_gaussian_line(ctx, f_line, c, abs_budget=tolerance * 1e-2)
        rhs = integrate_torus(ctx, f_torus, TorusContour(xi, torus_n),
                              abs_budget=tolerance * 1e-2)
        err = abs(lhs - rhs) / max(abs(rhs), 1.0)
        if err > worst:
            worst = err
            first = (lhs, rhs)
    return make_report("theta-lemma", {"q": ctx.q, "xi": xi, "n_poly": n_poly},
                       first[0], first[1], tolerance, ms(),
                       f"worst of {n_poly} random trig polynomials")


def check_kostant(ctx: QContext, lam_samples=None, truncation: int | None = None,
                  tolerance: float = 1e-9) -> CheckReport:
    """Kostant expansion of the theta function:

        gamma(lam) = (1 - q^2) sum_(n>=0) q^(n(n+2)/2) chi_n(q^(2 lam)) [n+1]_q.
    """
    ms = _timer()
    if lam_samples is None:
        lam_samples = [0.3 + 0.2j, -0.7 + 0.45j, 1.1 - 0.3j, 0.05 + 0.8j, 2.3 + 0.1j]
    B = truncation if truncation is not None else ctx.theta_truncation
    worst = 0.0
    first = None
    for lam in lam_samples:
        lhs = complex(theta_gamma(ctx, lam, truncation=B))
        rmax = abs(np.real(lam))
        acc = 0.0 + 0.0j
        n = 0
        while True:
            term = complex(qp_factory(ctx)(n * (n + 2) / 2.0)) \
                * complex(character(ctx, n, lam)) * complex(qdim(ctx, n))
            acc += term
            # certified geometric tail: once the exponent is past its minimum
            # the terms decay at least like q^(n - 2 rmax) per step
            if n > 2 * rmax + 4 and abs(term) < 1e-18 * max(abs(acc), 1.0):
                break
            n += 1
            if n > B + 8 * (rmax + 4):
                break
        rhs = (1.0 - ctx.q ** 2) * acc
        err = abs(lhs - rhs) / max(abs(lhs), abs(rhs))
        if err > worst or first is None:
            worst = err
            first = (lhs, rhs)
    return make_report("kostant", {"q": ctx.q, "B": B, "samples": len(lam_samples)},
                       first[0], first[1], tolerance, ms(),
                       f"worst of {len(lam_samples)} sample points")


# ---------------------------------------------------------------------------
# resonance, residues and chamber independence
# ---------------------------------------------------------------------------

def check_resonance(ctx: QContext, m: int, n_lam: int = 20,
                    tolerance: float = 1e-10, seed: int = 11) -> CheckReport:
    """Resonance conditions of the regularized trace:
    Psi~(lam, k) = Psi~(lam, -k-2) for k = 0..m-1."""
    ms = _timer()
    par = TraceFunctionParams(ctx, m)
    rng = np.random.default_rng(seed)
    worst = 0.0
    first = (0.0, 0.0)
    for _ in range(n_lam):
        lam = rng.normal() * 1.5 + 1j * rng.normal()
        for k, kp in resonance_pairs(par):
            a = complex(Psi_tilde(par, lam, k))
            b = complex(Psi_tilde(par, lam, kp))
            err = abs(a - b) / max(abs(a), abs(b), 1.0)
            if err > worst:
                worst, first = err, (a, b)
    if m == 0:
        first = (1.0, 1.0)
    return make_report("resonance", {"q": ctx.q, "m": m, "n_lam": n_lam},
                       first[0], first[1], tolerance, ms(),
                       f"pairs {resonance_pairs(par)}")


def check_residues_and_chambers(ctx: QContext, m: int, mu: float = 0.4,
                                nu: float = -0.3, xi: float | None = None,
                                line_n: int = 2048,
                                tolerance: float = 1e-8) -> CheckReport:
    """Residue antisymmetry and Weyl-chamber independence for
    G(lam) = g(lam) F(-lam, mu) F(lam, nu) with g = q^-(lam,lam):
    Res at lam = k equals minus the residue at lam = -k (k = 1..m), and
    I(xi) = I(-xi)."""
    ms = _timer()
    par = TraceFunctionParams(ctx, m)
    xi = float(m + 5) if xi is None else xi
    _check_contour(par, xi)

    def G(lam, use_mp=False):
        return gaussian_weight(ctx, lam, use_mp) \
            * F_closed(par, -lam, mu, use_mp) * F_closed(par, lam, nu, use_mp)

    worst_res = 0.0
    for k in range(1, m + 1):
        rp = residue_at(G, complex(k), radius=0.2, n_points=128)
        rm = residue_at(G, complex(-k), radius=0.2, n_points=128)
        worst_res = max(worst_res, abs(rp + rm) / max(abs(rp), abs(rm), 1e-30))

    bound = _heat_bound(ctx, m, xi, mu, nu)
    c_pos = line_contour_for(ctx, xi, bound, 1e-12, line_n)
    c_neg = LineContour(-xi, c_pos.y_max, line_n)
    budget = tolerance * 1e-2
    lhs = integrate_gaussian_line(ctx, G, c_pos, abs_budget=budget)
    rhs = integrate_gaussian_line(ctx, G, c_neg, abs_budget=budget)
    notes = f"max residue-pair asymmetry {worst_res:.2e} (k=1..{m}); chambers +-{xi:g}"
    return make_report("residues-chambers",
                       {"q": ctx.q, "m": m, "mu": mu, "nu": nu, "xi": xi},
                       lhs, rhs, tolerance, ms(), notes, extra_err=worst_res)


# ---------------------------------------------------------------------------
# dynamical Weyl group
# ---------------------------------------------------------------------------

def check_weyl_character_formula(ctx: QContext, m: int, mu: int | None = None,
                                 n_lam: int = 10, tolerance: float = 1e-8,
                                 cocycle_tolerance: float = 1e-9,
                                 seed: int = 13) -> CheckReport:
    """Dynamical Weyl group checks.

    * cocycle on V[0]: A(s.mu) A(mu) = 1 (s.mu = -mu-2);
    * generalized Weyl character formula (ordinary reflection in the
      second argument) at big anti-dominant integral mu:
      F_mu(lam) = F(lam, mu) - F(lam, -mu) / A_(s,V*)(-mu-1);
    * its trace form (dot action) at dominant integral -mu-1:
      Psi_md(lam) = Psi(lam, md) - Psi(lam, -md-2) A(md), md = -mu-1;
    * symmetry F(lam,mu) = A_V(lam-1) F(-lam,-mu) A_V*(mu-1) at integral
      points (both arguments dominant, off the pole set).

    The two character-formula forms use the reflection actions exactly as
    stated (ordinary for F, dot for the trace form); any discrepancy
    between them would show up as separate errors in the notes.
    """
    ms = _timer()
    par = TraceFunctionParams(ctx, m)
    mu = -(m + 9) if mu is None else int(mu)
    if -mu - 1 < m:
        raise DomainError("need big anti-dominant integral mu (-mu-1 >= m)")
    rng = np.random.default_rng(seed)

    worst_coc = 0.0
    for md in range(m + 5, m + 16):
        a = uqsl2.dynamical_weyl(ctx, m, md)
        b = uqsl2.dynamical_weyl_scalar(ctx, m, -md - 2)
        worst_coc = max(worst_coc, abs(a * b - 1.0))

    A_dual = uqsl2.dynamical_weyl_scalar(ctx, m, -mu - 1)
    worst = 0.0
    first = (0.0, 0.0)
    for _ in range(n_lam):
        lam = rng.normal() * 1.5 + 0.3 + 1j * rng.normal()
        lhs = complex(F_findim(par, mu, lam))
        rhs = complex(F_closed(par, lam, mu)) - complex(F_closed(par, lam, -mu)) / A_dual
        err = abs(lhs - rhs) / max(abs(lhs), abs(rhs))
        if err > worst:
            worst, first = err, (lhs, rhs)

    # trace form with the dot action, summed against the Verma trace series
    md = -mu - 1
    A_md = uqsl2.dynamical_weyl(ctx, m, md)
    worst_dot = 0.0
    for _ in range(4):
        lam = -3.5 - rng.random() + 1j * rng.normal()
        K = md + m + 320
        lhs = complex(uqsl2.findim_trace_psi(ctx, md, lam, m))
        rhs = uqsl2.trace_series_psi(ctx, lam, md, m, K=K) \
            - uqsl2.trace_series_psi(ctx, lam, -md - 2, m, K=K) * A_md
        worst_dot = max(worst_dot, abs(lhs - rhs) / max(abs(lhs), abs(rhs)))

    worst_sym = 0.0
    for lam_i in (m + 7, m + 10):
        for mu_i in (m + 8, m + 12):
            a1 = uqsl2.dynamical_weyl_scalar(ctx, m, lam_i - 1)
            a2 = uqsl2.dynamical_weyl_scalar(ctx, m, mu_i - 1)
            l = complex(F_closed(par, lam_i, mu_i))
            r = a1 * complex(F_closed(par, -lam_i, -mu_i)) * a2
            worst_sym = max(worst_sym, abs(l - r) / max(abs(l), abs(r)))

    notes = (f"cocycle err {worst_coc:.2e}; character-formula err {worst:.2e}; "
             f"trace-form (dot action) err {worst_dot:.2e}; "
             f"symmetry err {worst_sym:.2e}")
    extra = max(_fold(worst_coc, cocycle_tolerance, tolerance),
                worst_sym, worst_dot)
    return make_report("weyl-character", {"q": ctx.q, "m": m, "mu": mu},
                       first[0], first[1], tolerance, ms(), notes, extra_err=extra)


# ---------------------------------------------------------------------------
# Macdonald-Ruijsenaars operators
# ---------------------------------------------------------------------------

def check_mr_eigen_and_selfadjoint(ctx: QContext, m: int, n_grid: int = 10,
                                   tolerance: float = 1e-8,
                                   seed: int = 17) -> CheckReport:
    """Difference-operator checks with U = L_2:

    * eigenfunction property
      sum_w a_w(lam) F(lam + w, nu) = chi_U(q^(-2 nu)) F(lam, nu);
    * self-adjointness through the coefficient identity
      a_w^(U,V)(-lam - w) = a_w^(U,V*)(lam).
    """
    ms = _timer()
    par = TraceFunctionParams(ctx, m)
    rng = np.random.default_rng(seed)
    V = uqsl2.irreducible(ctx, 2 * m)
    Vs = uqsl2.right_dual(ctx, V)
    worst = 0.0
    first = (0.0, 0.0)
    for _ in range(n_grid):
        lam = rng.normal() * 0.8 + m + 4.0 + 1j * (rng.normal() * 0.5 + 0.3)
        nu = rng.normal() + 1j * rng.normal() * 0.4
        a = uqsl2.mr_operator_coeffs(ctx, m, lam)
        lhs = sum(a[w] * complex(F_closed(par, lam + w, nu)) for w in (2, 0, -2))
        rhs = complex(character(ctx, 2, -nu)) * complex(F_closed(par, lam, nu))
        err = abs(lhs - rhs) / abs(rhs)
        if err > worst:
            worst, first = err, (lhs, rhs)
    worst_sa = 0.0
    for _ in range(n_grid):
        lam = rng.normal() * 1.2 + 1j * (rng.normal() * 0.5 + 0.35)
        aVs = uqsl2.mr_operator_coeffs(ctx, m, lam, module=Vs)
        for w in (2, 0, -2):
            aV = uqsl2.mr_operator_coeffs(ctx, m, -lam - w)[w]
            worst_sa = max(worst_sa,
                           abs(aV - aVs[w]) / max(abs(aV), abs(aVs[w])))
    notes = f"eigen err {worst:.2e}; self-adjointness err {worst_sa:.2e}"
    return make_report("mr-operators", {"q": ctx.q, "m": m, "n_grid": n_grid},
                       first[0], first[1], tolerance, ms(), notes,
                       extra_err=worst_sa)


# ---------------------------------------------------------------------------
# integral transforms
# ---------------------------------------------------------------------------

def _eta_default(ctx: QContext) -> float:
    # generic height: just under half the pole-row spacing pi/L
    return 0.47 * math.pi / ctx.L


def check_transform_roundtrip(ctx: QContext, m: int, xi: float | None = None,
                              eta: float | None = None, n_grid: int = 20,
                              line_n: int = 2048, real_n: int = 1201,
                              tolerance: float = 1e-5,
                              realint_tolerance: float = 1e-6) -> CheckReport:
    """Inversion of the trace-function transform pair and the real-cycle
    heat identity.

    K_Im f(mu) = int_(C_xi) F(mu, -lam) f(lam) dlam maps Gaussian test
    functions on C_xi to rapidly decaying functions on D_eta, and

    K_Re g(lam) = int_(D_eta) F(lam, mu) Q(-mu-1) g(mu) dmu

    inverts it; the check reports the sup of |K_Re K_Im f - f| over an
    n_grid point sample of C_xi.  The real-cycle identity

        int_(D_eta) F(lam,mu) q^((mu,mu)) Q(-mu-1) F(mu,nu) dmu
            = q^(-(lam,lam)-(nu,nu)) F(lam,nu)

    is checked at (lam, nu) = (0.4, -0.3).
    """
    ms = _timer()
    par = TraceFunctionParams(ctx, m)
    xi = _default_xi(m) if xi is None else xi
    eta = _eta_default(ctx) if eta is None else eta
    _check_contour(par, xi)
    qp = qp_factory(ctx)

    y_max = eta + math.sqrt(2 * 38.0 / ctx.L)
    x_max = math.sqrt(2 * 38.0 / ctx.L) + m + 3.0
    y = np.linspace(-y_max, y_max, line_n)
    lam_nodes = xi + 1j * y
    wy = np.ones(line_n)
    wy[0] = wy[-1] = 0.5
    hy = 2 * y_max / (line_n - 1)
    x = np.linspace(-x_max, x_max, real_n)
    mu_nodes = 1j * eta + x
    wx = np.ones(real_n)
    wx[0] = wx[-1] = 0.5
    hx = 2 * x_max / (real_n - 1)
    c0 = math.sqrt(ctx.L / (2 * math.pi))

    def f_test(lam):
        # Gaussian bump on C_xi with a small exponential twist
        return qp(-(lam - xi) ** 2 / 2.0) * qp(0.4 * lam)

    # K_Im on the D_eta grid: (real_n, line_n) kernel
    K1 = F_closed(par, mu_nodes[:, None], -lam_nodes[None, :])
    g = c0 * hy * (K1 * (wy * f_test(lam_nodes))[None, :]).sum(axis=1)

    # K_Re back on a sample grid of C_xi
    lam_grid = xi + 1j * np.linspace(-2.0, 2.0, n_grid)
    K2 = F_closed(par, lam_grid[:, None], mu_nodes[None, :])
    qinv = Q_closed_inv(par, mu_nodes)
    back = c0 * hx * (K2 * (wx * g / qinv)[None, :]).sum(axis=1)
    sup_err = float(np.max(np.abs(back - f_test(lam_grid))))
    sup_scale = float(np.max(np.abs(f_test(lam_grid))))

    # real-cycle heat identity
    lam0, nu0 = 0.4, -0.3

    def g_real(mu, use_mp=False):
        return F_closed(par, lam0, mu, use_mp) \
            * qp_factory(ctx, use_mp)(mu * mu / 2) \
            * F_closed(par, mu, nu0, use_mp) / Q_closed_inv(par, mu, use_mp)

    rc = RealContour(eta, x_max, line_n)
    lhs_r = integrate_real_line(ctx, g_real, rc, abs_budget=realint_tolerance * 1e-2)
    rhs_r = complex(qp(-(lam0 * lam0 + nu0 * nu0) / 2.0)) * complex(F_closed(par, lam0, nu0))
    err_r = abs(lhs_r - rhs_r) / abs(rhs_r)

    notes = (f"roundtrip sup err {sup_err:.2e} (scale {sup_scale:.2f}); "
             f"real-cycle err {err_r:.2e}; eta={eta:.2f}")
    return make_report("transforms", {"q": ctx.q, "m": m, "xi": xi, "eta": eta},
                       complex(sup_err), 0.0, tolerance, ms(), notes,
                       extra_err=_fold(err_r, realint_tolerance, tolerance))


# ---------------------------------------------------------------------------
# convention gate
# ---------------------------------------------------------------------------

def check_oracle_consistency(ctx: QContext, m: int, n_pts: int = 20,
                             tolerance: float | None = None,
                             seed: int = 23, K: int = 300) -> CheckReport:
    """Convention gate binding the closed forms to the first-principles
    machinery; must pass before the other checks mean anything.

    * m = 1: the truncated Verma trace series reproduces the explicit
      3-dimensional-module formula to 1e-12 relative (K = 200);
    * any m: series vs delta * Psi * Qinv chain at Re lam <= -2 (1e-9);
    * Qinv(mu) * Q(-mu-1) = 1 against the fusion-contraction Q;
    * dynamical Weyl recursion vs its rational continuation.
    """
    ms = _timer()
    if tolerance is None:
        tolerance = 1e-12 if m == 1 else 1e-9
    par = TraceFunctionParams(ctx, m)
    rng = np.random.default_rng(seed)
    qp = qp_factory(ctx)
    worst = 0.0
    first = (1.0, 1.0)

    if m == 1:
        for _ in range(n_pts):
            lam = -3.0 - 2 * rng.random() + 1j * rng.normal()
            mu = rng.normal() * 1.5 + 1j * rng.normal()
            a = uqsl2.trace_series_psi(ctx, lam, mu, 1, K=200)
            b = complex(qp(lam * mu) / (1 - qp(-2 * lam)) * (
                1 + (qp(2) - qp(-2)) * qp(-2 * lam)
                / ((1 - qp(2 * mu)) * (1 - qp(-2 * (lam - 1))))))
            err = abs(a - b) / abs(b)
            if err > worst:
                worst, first = err, (a, b)

    worst_chain = 0.0
    for _ in range(n_pts):
        lam = -2.0 - 2 * rng.random() + 1j * rng.normal()
        mu = rng.normal() * 1.5 + 1j * rng.normal()
        a = uqsl2.trace_series_psi(ctx, lam, mu, m, K=K)
        b = complex(psi_from_closed(par, lam, mu))
        worst_chain = max(worst_chain, abs(a - b) / abs(b))

    worst_q = 0.0
    for _ in range(5):
        mu = rng.normal() * 1.5 + 1j * rng.normal() * 0.5
        prod = complex(Q_closed_inv(par, mu)) * uqsl2.q_operator(ctx, m, -mu - 1)
        worst_q = max(worst_q, abs(prod - 1.0))

    worst_dw = 0.0
    for md in range(m + 2, m + 8):
        a = uqsl2.dynamical_weyl(ctx, m, md)
        b = uqsl2.dynamical_weyl_scalar(ctx, m, md)
        worst_dw = max(worst_dw, abs(a - b) / abs(b))

    chain_tol = max(tolerance, 1e-9)
    notes = (f"series-vs-explicit {worst:.2e}; series-vs-chain {worst_chain:.2e}; "
             f"Q-oracle {worst_q:.2e}; dyn-Weyl {worst_dw:.2e}")
    extra = max(_fold(worst_chain, chain_tol, tolerance),
                _fold(worst_q, chain_tol, tolerance),
                _fold(worst_dw, chain_tol, tolerance))
    return make_report("oracle-consistency", {"q": ctx.q, "m": m},
                       first[0], first[1], tolerance, ms(), notes, extra_err=extra)
