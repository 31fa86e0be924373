"""Closed-form trace functions for V = L_2m.

The central object is the renormalized trace function F(lam, mu), a
symmetric function of (lam, mu) given by a finite sum of products of
rational functions of q^(2 lam) and q^(2 mu) times q^(-lam mu).  It is
tied to the first-principles machinery of :mod:`qtrace.uqsl2` through

    F(lam, mu) = delta_q(lam) * Psi(lam, -mu-1) * Qinv(mu),

where Psi is the weighted Verma trace and Qinv(mu) is the inverse of the
Q-operator scalar evaluated at -mu-1.  That identity (and the m=1
special cases) pins every normalization; the test suite enforces it
against the series oracle with no free constants.

All evaluators take ``use_mp`` for high-precision scalar evaluation;
the binary64 path accepts numpy arrays and broadcasts.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .errors import DomainError, NearPole
from .qnum import QContext, qfact, qp_factory, weyl_denominator
from . import uqsl2

_POLE_EPS = 1e-12


@dataclass(frozen=True)
class TraceFunctionParams:
    """Evaluation parameters: the module V = L_2m.

    The pole depth N equals m: in one kappa-period the lam-poles of
    F(lam, mu) sit exactly at lam = 1, ..., m (all simple).
    """

    ctx: QContext
    m: int

    def __post_init__(self):
        if self.m < 0 or self.m != int(self.m):
            raise DomainError(f"m must be an integer >= 0, got {self.m}")

    @property
    def N(self) -> int:
        return self.m


def _amin(x) -> float:
    x = np.asarray(x)
    return float(np.min(np.abs(x))) if x.size else np.inf


def _sum_terms(par: TraceFunctionParams, lam, mu, use_mp: bool, ls=None):
    """sum over l of the closed-form summands, with the mu-zero factors
    (q^(-2mu-2j) - 1) folded in so the expression is pole-free except for
    the lam-denominators and the overall mu-prefactor denominator."""
    ctx = par.ctx
    m = par.m
    qp = qp_factory(ctx, use_mp)
    one = mp.mpc(1) if use_mp else 1.0
    qmq = qp(1) - qp(-1)
    total = None
    for l in (range(m + 1) if ls is None else ls):
        coeff = ((-1) ** l) * qp(2 * m + l * (l - 1) / 2) * qmq ** l \
            * qfact(ctx, m + l, use_mp) / (qfact(ctx, l, use_mp) * qfact(ctx, m - l, use_mp))
        term = coeff * qp(-2 * l * np.asarray(lam) if not use_mp else -2 * l * lam)
        for j in range(1, l + 1):
            den = one - qp(-2 * (lam - j))
            if _amin(den if not use_mp else complex(den)) < _POLE_EPS:
                raise NearPole(f"lam within {_POLE_EPS:.0e} of the pole divisor lam = {j}")
            term = term / den
        for j in range(l + 1, m + 1):
            term = term * (qp(-2 * mu - 2 * j) - one)
        total = term if total is None else total + term
    return total


def _mu_prefactor_den(par: TraceFunctionParams, mu, use_mp: bool):
    ctx = par.ctx
    qp = qp_factory(ctx, use_mp)
    den = mp.mpc(1) if use_mp else 1.0
    for j in range(1, par.m + 1):
        f = qp(-2 * mu - 2 * j + 2) - qp(-2 * par.m)
        if _amin(f if not use_mp else complex(f)) < _POLE_EPS:
            raise NearPole(f"mu within {_POLE_EPS:.0e} of the pole divisor mu = {par.m - j + 1}")
        den = den * f
    return den


def F_closed(par: TraceFunctionParams, lam, mu, use_mp: bool = False):
    """Renormalized trace function F(lam, mu); symmetric in (lam, mu).

    m = 0 gives q^(-lam mu).  Poles (all simple): lam in {1..m} + kappa Z
    and likewise in mu.
    """
    qp = qp_factory(par.ctx, use_mp)
    s = _sum_terms(par, lam, mu, use_mp)
    return qp(-np.multiply(lam, mu) if not use_mp else -lam * mu) * s \
        / _mu_prefactor_den(par, mu, use_mp)


def F_ratio(par: TraceFunctionParams, lam, mu, use_mp: bool = False):
    """The exactly kappa-periodic part G of F = q^(-lam mu) G(lam, mu).

    G is a rational function of q^(2 lam) and q^(2 mu); callers that need
    exact lattice periodicity (torus quadrature of F(mu,-lam) F(lam,nu)
    with mu - nu in Z) combine G factors with an integer-exponent
    q^(lam (mu - nu)) so the floating-point representation of mu and nu
    cannot break the periodicity.
    """
    s = _sum_terms(par, lam, mu, use_mp)
    return s / _mu_prefactor_den(par, mu, use_mp)


def F_term(par: TraceFunctionParams, l: int, lam, mu, use_mp: bool = False):
    """Single summand of the closed form (prefactor included), so that
    F = sum over l in 0..m of F_term(l)."""
    if not (0 <= l <= par.m):
        raise DomainError(f"l must lie in 0..{par.m}")
    qp = qp_factory(par.ctx, use_mp)
    s = _sum_terms(par, lam, mu, use_mp, ls=[l])
    return qp(-np.multiply(lam, mu) if not use_mp else -lam * mu) * s \
        / _mu_prefactor_den(par, mu, use_mp)


def Q_closed_inv(par: TraceFunctionParams, mu, use_mp: bool = False):
    """Closed form for the inverse Q-operator scalar at -mu-1 (the
    normalization entering F and the orthogonality constants):

        Qinv(mu) = q^(2m) prod_(j=1..m) (q^(-2mu-2j) - 1)
                                      / (q^(-2mu-2j+2) - q^(-2m)).

    Satisfies Qinv(mu) * q_operator(m, -mu-1) = 1.
    """
    ctx = par.ctx
    qp = qp_factory(ctx, use_mp)
    one = mp.mpc(1) if use_mp else 1.0
    num = one
    for j in range(1, par.m + 1):
        num = num * (qp(-2 * mu - 2 * j) - one)
    return qp(2 * par.m) * num / _mu_prefactor_den(par, mu, use_mp)


def psi_from_closed(par: TraceFunctionParams, lam, mu, use_mp: bool = False):
    """Weighted Verma trace Psi(lam, mu) recovered from the closed forms:
    Psi(lam, mu) = F(lam, -mu-1) / (delta_q(lam) Qinv(-mu-1))."""
    ctx = par.ctx
    return F_closed(par, lam, -mu - 1, use_mp) / (
        weyl_denominator(ctx, lam, use_mp) * Q_closed_inv(par, -mu - 1, use_mp))


def Psi_tilde(par: TraceFunctionParams, lam, mu, use_mp: bool = False):
    """The regularized trace Psi~(lam, mu) = Psi(lam, mu) *
    prod_(i=0..m-1) (q^(mu-i) - q^(-mu+i)).

    The zero factors cancel the mu-poles of Psi exactly, leaving a
    function entire in mu (poles in lam only); here it is evaluated in
    the manifestly pole-free form

        Psi~ = S(lam, -mu-1) * q^(-lam(-mu-1)) * q^(-m mu + m(m-1)/2 - 2m)
               / delta_q(lam)

    with S the mu-regular summand total.  It satisfies the resonance
    conditions Psi~(lam, k) = Psi~(lam, -k-2) for k = 0..m-1.
    """
    ctx = par.ctx
    m = par.m
    qp = qp_factory(ctx, use_mp)
    mu_hat = -mu - 1
    s = _sum_terms(par, lam, mu_hat, use_mp)
    num = qp(-np.multiply(lam, mu_hat) if not use_mp else -lam * mu_hat) * s
    return num * qp(-m * mu + m * (m - 1) / 2 - 2 * m) / weyl_denominator(ctx, lam, use_mp)


def resonance_pairs(par: TraceFunctionParams) -> list[tuple[int, int]]:
    """The m resonance argument pairs (k, -k-2), k = 0..m-1, at which
    Psi~(lam, .) takes equal values."""
    return [(k, -k - 2) for k in range(par.m)]


def F_findim(par: TraceFunctionParams, nu: int, lam, use_mp: bool = False):
    """Finite-dimensional trace function F_nu(lam) for big anti-dominant
    integral nu (so -nu-1 is dominant integral >= m):

        F_nu(lam) = delta_q(lam) Psi_(-nu-1)(lam) Qinv(nu).
    """
    ctx = par.ctx
    if nu != int(nu) or -nu - 1 < par.m:
        raise DomainError(f"need anti-dominant integral nu with -nu-1 >= m, got {nu}")
    psi = uqsl2.findim_trace_psi(ctx, -int(nu) - 1, lam, par.m, use_mp=use_mp)
    return weyl_denominator(ctx, lam, use_mp) * psi * Q_closed_inv(par, nu, use_mp)


def pole_list(par: TraceFunctionParams) -> list[tuple[complex, complex]]:
    """lam-poles of F in one period strip: (location k, lattice period kappa)."""
    return [(complex(k), par.ctx.kappa) for k in range(1, par.m + 1)]
