"""Calibrated contour quadrature.

Three contours appear throughout:

* the torus C_xi / kappa Qv, parametrized lam = xi + i t T, t in [0, 1),
  T = 2 pi / L, with unit total measure (plain node average; spectrally
  accurate for periodic analytic integrands);
* the full imaginary line C_xi = xi + i R with the Gaussian-normalized
  measure c0 dy, c0 = sqrt(L / 2 pi), fixed by int q^-(lam,lam) dlam = 1;
* the real line D_eta = i eta + R with measure c1 dx, c1 = sqrt(L / 2 pi),
  fixed by requiring the q^(2(lam,mu)) transform and its q^(-2(lam,mu))
  inverse to compose to the identity.

Both constants are verified at runtime by :func:`normalization_selftest`
rather than trusted.

Oscillatory cancellation: integrands like G(lam) q^-(lam,lam) on C_xi
reach modulus exp(L xi^2 / 2) while their integral stays O(1), so the
binary64 node sum can lose all significant digits for big xi.  Every
integrator therefore accepts an absolute error budget; when the budget
is not met by binary64 (estimated from the node magnitudes) the sum is
recomputed with mpmath at a working precision chosen from the observed
cancellation.  Integrands must accept ``use_mp`` for that path.

Node sums are fixed-order reductions, so results are reproducible
bit-for-bit for a given node count.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .errors import DomainError, NotIsolated, TailTooLarge
from .qnum import QContext, gaussian_weight, qp_factory, theta_gamma
from .report import CheckReport, make_report

# per-node roundoff of a binary64 sum, with slack for the evaluators
_EPS_SUM = 5e-15


@dataclass(frozen=True)
class TorusContour:
    """One period of C_xi in the imaginary direction, n_points nodes."""
    xi: float
    n_points: int = 128

    def __post_init__(self):
        if self.n_points < 16:
            raise DomainError("torus contour needs n_points >= 16")

    def nodes(self, ctx: QContext) -> np.ndarray:
        T = ctx.torus_period
        k = np.arange(self.n_points)
        return self.xi + 1j * T * k / self.n_points

    def min_pole_distance(self, poles) -> float:
        return min((abs(self.xi - p.real) for p, _ in poles), default=math.inf)


@dataclass(frozen=True)
class LineContour:
    """Truncated imaginary line xi + i [-y_max, y_max]."""
    xi: float
    y_max: float
    n_points: int = 2048

    def nodes(self, ctx: QContext) -> np.ndarray:
        y = np.linspace(-self.y_max, self.y_max, self.n_points)
        return self.xi + 1j * y

    def check_tail(self, ctx: QContext, bound: float, budget: float):
        tail = bound * math.exp(-ctx.L * self.y_max ** 2 / 2.0)
        if tail > budget:
            raise TailTooLarge(
                f"Gaussian tail {tail:.3e} at y_max={self.y_max} above budget {budget:.3e}")


@dataclass(frozen=True)
class RealContour:
    """Truncated real line i eta + [-x_max, x_max]."""
    eta: float
    x_max: float
    n_points: int = 2048

    def nodes(self) -> np.ndarray:
        return 1j * self.eta + np.linspace(-self.x_max, self.x_max, self.n_points)


def line_contour_for(ctx: QContext, xi: float, magnitude_bound: float = 1.0,
                     tail_budget: float = 1e-12, n_points: int = 2048) -> LineContour:
    """Pick y_max so exp(-L y^2/2) * magnitude_bound <= tail_budget."""
    y2 = 2.0 * (math.log(max(magnitude_bound, 1.0)) - math.log(tail_budget)) / ctx.L
    return LineContour(xi, math.sqrt(max(y2, 1.0)) + 1.0, n_points)


def measure_c0(ctx: QContext) -> float:
    """Normalizing constant of the C_xi measure, sqrt(L / 2 pi)."""
    return math.sqrt(ctx.L / (2.0 * math.pi))


def _mp_dps_for(scale: float, budget: float) -> int:
    return max(25, int(math.log10(max(scale, 1.0) / budget)) + 10)


def _escalate(ctx: QContext, vals: np.ndarray, budget: float | None,
              estimate: complex):
    """Decide whether the binary64 node sum meets the budget; in extended
    precision mode every budgeted (or estimable) integral goes through the
    high-precision path regardless."""
    forced = ctx.precision_mode == "extended"
    if budget is None:
        if not forced:
            return False, 0.0, budget
        budget = max(abs(estimate) * 1e-13, 1e-280)
    scale = float(np.max(np.abs(vals)))
    needs = forced or scale * _EPS_SUM * len(vals) ** 0.5 > budget
    return needs, scale, budget


def integrate_torus(ctx: QContext, f, contour: TorusContour,
                    abs_budget: float | None = None) -> complex:
    """Average of f over one torus period (unit-normalized measure)."""
    nodes = contour.nodes(ctx)
    vals = np.asarray(f(nodes), dtype=complex)
    value = complex(np.sum(vals) / contour.n_points)
    needs_mp, scale, abs_budget = _escalate(ctx, vals, abs_budget, value)
    if needs_mp:
        with mp.workdps(_mp_dps_for(scale, abs_budget)):
            T = 2 * mp.pi / (-mp.log(mp.mpf(ctx.q)))
            n = contour.n_points
            acc = mp.fsum(f(contour.xi + 1j * T * k / n, use_mp=True) for k in range(n))
            value = complex(acc / n)
    return value


def integrate_gaussian_line(ctx: QContext, f, contour: LineContour,
                            abs_budget: float | None = None) -> complex:
    """c0 * trapezoid of f over xi + i[-y_max, y_max].

    f must include any Gaussian factor itself; with f = q^-(lam,lam)
    the result is 1 for every xi.
    """
    nodes = contour.nodes(ctx)
    h = 2.0 * contour.y_max / (contour.n_points - 1)
    vals = np.asarray(f(nodes), dtype=complex)
    w = np.ones(contour.n_points)
    w[0] = w[-1] = 0.5
    value = complex(measure_c0(ctx) * h * np.sum(w * vals))
    needs_mp, scale, abs_budget = _escalate(ctx, vals, abs_budget, value)
    if needs_mp:
        with mp.workdps(_mp_dps_for(scale, abs_budget)):
            L = -mp.log(mp.mpf(ctx.q))
            c0 = mp.sqrt(L / (2 * mp.pi))
            n = contour.n_points
            hm = mp.mpf(2) * contour.y_max / (n - 1)
            ys = [-mp.mpf(contour.y_max) + hm * k for k in range(n)]
            terms = [f(contour.xi + 1j * y, use_mp=True) for y in ys]
            terms[0] *= mp.mpf(1) / 2
            terms[-1] *= mp.mpf(1) / 2
            value = complex(c0 * hm * mp.fsum(terms))
    return value


def integrate_real_line(ctx: QContext, g, contour: RealContour,
                        abs_budget: float | None = None) -> complex:
    """c1 * trapezoid of g over i eta + [-x_max, x_max]."""
    nodes = contour.nodes()
    h = 2.0 * contour.x_max / (contour.n_points - 1)
    vals = np.asarray(g(nodes), dtype=complex)
    w = np.ones(contour.n_points)
    w[0] = w[-1] = 0.5
    value = complex(measure_c0(ctx) * h * np.sum(w * vals))
    needs_mp, scale, abs_budget = _escalate(ctx, vals, abs_budget, value)
    if needs_mp:
        with mp.workdps(_mp_dps_for(scale, abs_budget)):
            L = -mp.log(mp.mpf(ctx.q))
            c1 = mp.sqrt(L / (2 * mp.pi))
            n = contour.n_points
            hm = mp.mpf(2) * contour.x_max / (n - 1)
            xs = [-mp.mpf(contour.x_max) + hm * k for k in range(n)]
            terms = [g(1j * mp.mpf(contour.eta) + x, use_mp=True) for x in xs]
            terms[0] *= mp.mpf(1) / 2
            terms[-1] *= mp.mpf(1) / 2
            value = complex(c1 * hm * mp.fsum(terms))
    return value


def residue_at(f, p: complex, radius: float = 0.2, n_points: int = 64,
               tol: float = 1e-9) -> complex:
    """(1/2 pi i) contour integral of f around |lam - p| = radius by the
    trapezoid rule, with a node-doubling consistency check."""
    if radius > 0.25:
        raise DomainError("residue radius must be <= 0.25")

    def ring(n):
        th = 2.0 * np.pi * np.arange(n) / n
        z = np.exp(1j * th)
        vals = np.asarray(f(p + radius * z), dtype=complex)
        return complex(radius * np.sum(vals * z) / n)

    r1 = ring(n_points)
    r2 = ring(2 * n_points)
    if abs(r1 - r2) > tol * max(abs(r2), 1.0):
        raise NotIsolated(
            f"residue estimate unstable under node doubling: {r1} vs {r2}")
    return r2


def node_doubling_delta(value_fn, n: int) -> float:
    """Relative change of a quadrature when the node count doubles."""
    a = value_fn(n)
    b = value_fn(2 * n)
    return abs(a - b) / max(abs(b), 1e-300)


def normalization_selftest(ctx: QContext) -> CheckReport:
    """Verify the measure constants and the theta-unfolding identity.

    Checks int_(C_xi) q^-(lam,lam) dlam = 1 at xi in {0, 7}, and
    int_(C_xi) f q^-(lam,lam) dlam = int_(torus) f gamma dlam for the
    Fourier modes f = q^(b lam), b = 0..3.
    """
    t0 = time.perf_counter()
    worst = 0.0
    notes = []
    for xi in (0.0, 7.0):
        c = line_contour_for(ctx, xi, math.exp(ctx.L * xi * xi / 2.0))

        def gauss(lam, use_mp=False):
            return gaussian_weight(ctx, lam, use_mp)

        val = integrate_gaussian_line(ctx, gauss, c, abs_budget=1e-11)
        worst = max(worst, abs(val - 1.0))
        notes.append(f"gauss(xi={xi:g}): {abs(val - 1.0):.2e}")
    xi = 1.5
    for b in range(4):
        c = line_contour_for(ctx, xi, math.exp(ctx.L * xi * xi / 2.0) * ctx.q ** (-abs(b) * xi))

        def f_line(lam, use_mp=False, b=b):
            qp = qp_factory(ctx, use_mp)
            return qp(b * lam) * gaussian_weight(ctx, lam, use_mp)

        def f_torus(lam, use_mp=False, b=b):
            qp = qp_factory(ctx, use_mp)
            return qp(b * lam) * theta_gamma(ctx, lam, use_mp=use_mp)

        lhs = integrate_gaussian_line(ctx, f_line, c, abs_budget=1e-11)
        rhs = integrate_torus(ctx, f_torus, TorusContour(xi, 128), abs_budget=1e-11)
        worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1.0))
        notes.append(f"theta(b={b}): {abs(lhs - rhs):.2e}")
    ms = (time.perf_counter() - t0) * 1e3
    return make_report("normalization-selftest", {"q": ctx.q}, 1.0, 1.0,
                       tolerance=1e-10, runtime_ms=ms,
                       notes="; ".join(notes), extra_err=worst)
