"""q-arithmetic and the shared numeric vocabulary.

Conventions (sl2 numeric coordinates):

* weights are complex numbers, the fundamental weight <-> 1, so the
  simple root alpha <-> 2, rho <-> 1, the weight lattice P <-> Z and the
  dual root lattice Qv <-> 2Z;
* the bilinear form is normalized by (alpha, alpha) = 2, hence
  2(lam, mu) = lam * mu and (lam, lam) = lam^2 / 2;
* q is a real number in (0, 1) and q^x := exp(x * ln q) with the real
  logarithm, so q^x is single-valued for every complex x;
* kappa = i*pi/ln q (purely imaginary, Im kappa < 0); shifting lam by
  2*kappa fixes q^(2*lam), so functions of q^(2*lam) live on the torus
  C_xi / kappa*Qv whose period along the imaginary axis is 2*pi/L with
  L = -ln q.

Every function takes a ``use_mp`` flag.  With ``use_mp=False`` arguments
may be numpy arrays and everything is vectorized binary64; with
``use_mp=True`` arguments are scalars and all arithmetic runs through
mpmath at the caller's working precision.  The slow path exists because
several verified identities hide cancellations of size exp(L*xi^2/2)
that exceed what binary64 can resolve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .errors import DomainError, TailTooLarge


@dataclass(frozen=True)
class QContext:
    """Deformation parameter and truncation defaults.

    Derived quantities: L = -ln q > 0, kappa = i*pi/ln q (Im kappa < 0)
    and torus_period = 2*pi/L, the length of one kappa*Qv period in the
    imaginary direction.
    """

    q: float
    theta_truncation: int = 60
    precision_mode: str = "double"

    def __post_init__(self):
        if not (0.0 < self.q < 1.0):
            raise DomainError(f"q must lie in (0, 1), got {self.q}")
        if self.theta_truncation < 1:
            raise DomainError("theta_truncation must be >= 1")
        if self.precision_mode not in ("double", "extended"):
            raise DomainError(f"unknown precision_mode {self.precision_mode!r}")

    @property
    def log_q(self) -> float:
        return math.log(self.q)

    @property
    def L(self) -> float:
        return -math.log(self.q)

    @property
    def kappa(self) -> complex:
        return 1j * math.pi / math.log(self.q)

    @property
    def torus_period(self) -> float:
        return 2.0 * math.pi / self.L


def qp_factory(ctx: QContext, use_mp: bool = False):
    """Return the function x -> q^x for the requested arithmetic backend."""
    if use_mp:
        logq = mp.log(mp.mpf(ctx.q))
        return lambda x: mp.exp(x * logq)
    logq = ctx.log_q
    return lambda x: np.exp(np.multiply(x, logq))


def qpow(ctx: QContext, x, use_mp: bool = False):
    """q^x = exp(x ln q); single-valued since q is a positive real."""
    return qp_factory(ctx, use_mp)(x)


def pair2(lam, mu):
    """2(lam, mu) = lam*mu in numeric coordinates; (lam, lam) = lam^2/2."""
    return lam * mu


def qint(ctx: QContext, n, use_mp: bool = False):
    """Quantum integer [n]_q = (q^n - q^-n)/(q - q^-1), for complex n."""
    qp = qp_factory(ctx, use_mp)
    return (qp(n) - qp(-n)) / (qp(1) - qp(-1))


def qfact(ctx: QContext, n: int, use_mp: bool = False):
    """[n]_q! = [1][2]...[n]; [0]! = 1.  Integer n >= 0 only."""
    if n != int(n) or n < 0:
        raise DomainError(f"q-factorial needs an integer n >= 0, got {n}")
    out = mp.mpf(1) if use_mp else 1.0
    for j in range(1, int(n) + 1):
        out = out * qint(ctx, j, use_mp)
    return out


def qbinom(ctx: QContext, n: int, k: int, use_mp: bool = False):
    """q-binomial [n choose k]_q = [n]!/([k]![n-k]!), 0 <= k <= n."""
    if not (0 <= k <= n):
        raise DomainError(f"qbinom needs 0 <= k <= n, got n={n}, k={k}")
    return qfact(ctx, n, use_mp) / (qfact(ctx, k, use_mp) * qfact(ctx, n - k, use_mp))


def weyl_denominator(ctx: QContext, lam, use_mp: bool = False):
    """delta_q(lam) = q^lam - q^-lam (odd in lam)."""
    qp = qp_factory(ctx, use_mp)
    return qp(lam) - qp(-lam)


def gaussian_weight(ctx: QContext, lam, use_mp: bool = False):
    """q^-(lam,lam) = q^(-lam^2/2); decays like exp(-L y^2/2) on C_xi."""
    qp = qp_factory(ctx, use_mp)
    return qp(-lam * lam / 2)


def theta_tail_bound(ctx: QContext, lam, truncation: int) -> float:
    """Upper bound for the discarded |beta| > B part of the theta sum.

    Valid once B exceeds |Re lam| so the summand is decreasing:
    sum_{b>B} q^(b^2/2 - b|Re lam|) <= q^(B^2/2 - B|Re lam|) / (1 - q).
    """
    re = float(np.max(np.abs(np.real(np.asarray(lam)))))
    b = float(truncation)
    exponent = b * b / 2.0 - re * b
    # q^exponent without overflow for very negative exponents.
    log_tail = exponent * ctx.log_q - math.log1p(-ctx.q)
    return 2.0 * math.exp(min(log_tail, 700.0))


def theta_gamma(ctx: QContext, lam, truncation: int | None = None,
                tol: float | None = None, use_mp: bool = False):
    """Theta function gamma(lam) = sum over the weight lattice of
    q^((beta,beta)) q^(2(lam,beta)) = sum_b q^(b^2/2) q^(lam*b).

    Even in lam and 2*kappa-periodic.  Truncated at |b| <= truncation
    (default ctx.theta_truncation); raises TailTooLarge when the tail
    bound exceeds ``tol``.
    """
    B = int(truncation if truncation is not None else ctx.theta_truncation)
    if tol is not None:
        bound = theta_tail_bound(ctx, lam, B)
        if bound > tol:
            raise TailTooLarge(
                f"theta tail bound {bound:.3e} exceeds tolerance {tol:.3e} at B={B}")
    qp = qp_factory(ctx, use_mp)
    if use_mp:
        return mp.fsum(qp(mp.mpf(b * b) / 2) * qp(b * lam) for b in range(-B, B + 1))
    lam = np.asarray(lam, dtype=complex)
    b = np.arange(-B, B + 1)
    # outer sum over lattice points; lam may be any shape
    terms = np.exp((b * b / 2.0 + np.multiply.outer(lam, b)) * ctx.log_q)
    return terms.sum(axis=-1)


def character(ctx: QContext, n: int, lam, use_mp: bool = False):
    """chi_n(q^(2 lam)) = (q^((n+1)lam) - q^(-(n+1)lam)) / (q^lam - q^-lam).

    The removable singularity at delta_q(lam) = 0 is handled by falling
    back to the defining weight sum sum_j q^((n-2j) lam).
    """
    if n < 0 or n != int(n):
        raise DomainError(f"character needs an integer n >= 0, got {n}")
    n = int(n)
    qp = qp_factory(ctx, use_mp)
    if use_mp:
        den = qp(lam) - qp(-lam)
        if abs(den) < 1e-8:
            return mp.fsum(qp((n - 2 * j) * lam) for j in range(n + 1))
        return (qp((n + 1) * lam) - qp(-(n + 1) * lam)) / den
    lam = np.asarray(lam, dtype=complex)
    den = qp(lam) - qp(-lam)
    safe = np.where(np.abs(den) < 1e-8, 1.0, den)
    ratio = (qp((n + 1) * lam) - qp(-(n + 1) * lam)) / safe
    if np.any(np.abs(den) < 1e-8):
        j = np.arange(n + 1)
        direct = np.exp(np.multiply.outer(lam, (n - 2 * j)) * ctx.log_q).sum(axis=-1)
        ratio = np.where(np.abs(den) < 1e-8, direct, ratio)
    if ratio.ndim == 0:
        return complex(ratio)
    return ratio


def qdim(ctx: QContext, n: int, use_mp: bool = False):
    """Quantum dimension of the (n+1)-dimensional irreducible: [n+1]_q."""
    return qint(ctx, n + 1, use_mp)
