import numpy as np
import pytest

from qtrace.errors import DomainError, NearPole
from qtrace.qnum import QContext, qp_factory, weyl_denominator, character
from qtrace import tracefn, uqsl2
from qtrace.quad import residue_at

CTX = QContext(0.5)
RNG = np.random.default_rng(3)


def params(m, ctx=CTX):
    return tracefn.TraceFunctionParams(ctx, m)


class TestFClosed:
    def test_trivial(self):
        qp = qp_factory(CTX)
        par = params(0)
        for _ in range(5):
            lam, mu = RNG.normal(size=2) * 2 + 1j * RNG.normal(size=2)
            assert tracefn.F_closed(par, lam, mu) == pytest.approx(complex(qp(-lam * mu)))

    def test_three_dimensional_display(self):
        # explicit formula for the 3-dimensional module
        qp = qp_factory(CTX)
        par = params(1)
        for _ in range(20):
            lam, mu = RNG.normal(size=2) * 2 + 1j * RNG.normal(size=2)
            ref = qp(-lam * mu) * (qp(2 * (lam + mu)) - qp(2 * lam - 2)
                                   - qp(2 * mu - 2) + 1) / (
                (1 - qp(2 * lam - 2)) * (1 - qp(2 * mu - 2)))
            val = tracefn.F_closed(par, lam, mu)
            assert abs(val - ref) < 1e-12 * abs(ref)

    def test_symmetry(self):
        for m in (1, 2, 3):
            par = params(m)
            pts = RNG.normal(size=(200, 2)) * 2 + 1j * RNG.normal(size=(200, 2))
            a = tracefn.F_closed(par, pts[:, 0], pts[:, 1])
            b = tracefn.F_closed(par, pts[:, 1], pts[:, 0])
            assert np.max(np.abs(a - b) / np.maximum(np.abs(a), np.abs(b))) < 1e-11

    def test_definition_consistency(self):
        # delta(lam) Psi_series(lam, -mu-1) Qinv(mu) = F(lam, mu), Re lam < 0
        for m in (0, 1, 2, 3):
            par = params(m)
            for _ in range(8):
                lam = -2.2 - 2 * RNG.random() + 1j * RNG.normal()
                mu = RNG.normal() * 1.5 + 1j * RNG.normal()
                lhs = complex(weyl_denominator(CTX, lam)) \
                    * uqsl2.trace_series_psi(CTX, lam, -mu - 1, m, K=300) \
                    * complex(tracefn.Q_closed_inv(par, mu))
                rhs = complex(tracefn.F_closed(par, lam, mu))
                assert abs(lhs - rhs) < 1e-9 * abs(rhs)

    def test_quasi_periodicity(self):
        # the ratio part of F is exactly lattice periodic in lam
        for m in (1, 2):
            par = params(m)
            for _ in range(10):
                lam = RNG.normal() * 2 + 1j * RNG.normal()
                mu = RNG.normal() * 2 + 1j * RNG.normal()
                a = tracefn.F_ratio(par, lam, mu)
                b = tracefn.F_ratio(par, lam + 2 * CTX.kappa, mu)
                c = tracefn.F_ratio(par, lam + CTX.kappa, mu)
                assert abs(a - b) < 1e-12 * abs(a)
                assert abs(a - c) < 1e-12 * abs(a)

    def test_near_pole_raises(self):
        par = params(1)
        with pytest.raises(NearPole):
            tracefn.F_closed(par, 1.0 + 1e-14, 0.4)
        with pytest.raises(NearPole):
            tracefn.F_closed(par, 0.4, 1.0 + 1e-14)

    def test_terms_sum_to_total(self):
        for m in (1, 2, 3):
            par = params(m)
            lam, mu = 0.37 + 0.9j, -0.6 + 0.4j
            total = sum(tracefn.F_term(par, l, lam, mu) for l in range(m + 1))
            assert abs(total - tracefn.F_closed(par, lam, mu)) < 1e-12 * abs(total)

    def test_mp_matches(self):
        import mpmath as mp
        par = params(2)
        lam, mu = 0.4 - 0.8j, 1.7 + 0.2j
        a = complex(tracefn.F_closed(par, lam, mu))
        with mp.workdps(35):
            b = complex(tracefn.F_closed(par, mp.mpc(lam), mp.mpc(mu), use_mp=True))
        assert abs(a - b) < 1e-13 * abs(a)


class TestQClosedInv:
    def test_trivial(self):
        assert tracefn.Q_closed_inv(params(0), 0.3) == 1.0

    def test_inverts_fusion_contraction(self):
        for m in (1, 2, 3):
            par = params(m)
            for mu in (0.3, -0.7 + 0.4j, 2.2):
                prod = complex(tracefn.Q_closed_inv(par, mu)) \
                    * uqsl2.q_operator(CTX, m, -mu - 1)
                assert abs(prod - 1.0) < 1e-10

    def test_near_pole(self):
        with pytest.raises(NearPole):
            tracefn.Q_closed_inv(params(1), 1.0 + CTX.kappa)


class TestPsiTilde:
    def test_trivial_is_verma_character(self):
        qp = qp_factory(CTX)
        par = params(0)
        lam, mu = -1.3 + 0.7j, 0.9 - 0.2j
        a = complex(tracefn.Psi_tilde(par, lam, mu))
        b = complex(qp(lam * mu) / (1 - qp(-2 * lam)))
        assert abs(a - b) < 1e-12 * abs(b)

    def test_regularization_consistency(self):
        # Psi~ = Psi * prod_(i<m) (q^(mu-i) - q^(-mu+i)) at generic mu
        qp = qp_factory(CTX)
        for m in (1, 2, 3):
            par = params(m)
            for _ in range(8):
                lam = RNG.normal() + 1j * RNG.normal()
                mu = RNG.normal() * 2 + 1j * RNG.normal()
                fac = np.prod([qp(mu - i) - qp(-mu + i) for i in range(m)])
                a = complex(tracefn.psi_from_closed(par, lam, mu)) * complex(fac)
                b = complex(tracefn.Psi_tilde(par, lam, mu))
                assert abs(a - b) < 1e-11 * max(abs(a), abs(b))

    def test_resonance(self):
        for m in (1, 2, 3):
            par = params(m)
            assert tracefn.resonance_pairs(par) == [(k, -k - 2) for k in range(m)]
            for _ in range(20):
                lam = RNG.normal() * 1.5 + 1j * RNG.normal()
                for k, kp in tracefn.resonance_pairs(par):
                    a = complex(tracefn.Psi_tilde(par, lam, k))
                    b = complex(tracefn.Psi_tilde(par, lam, kp))
                    assert abs(a - b) < 1e-10 * max(abs(a), abs(b), 1.0)

    def test_entire_in_mu(self):
        # finite at the former pole locations of Psi
        par = params(2)
        for mu in (0.0, 1.0, -2.0, -3.0):
            v = complex(tracefn.Psi_tilde(par, 0.4 + 0.3j, mu))
            assert np.isfinite(v.real) and np.isfinite(v.imag)


class TestFFindim:
    def test_trivial_weyl_character(self):
        # m = 0 collapses to delta times the character of L_(-nu-1)
        par = params(0)
        for nu in (-4, -7):
            lam = 0.3 + 0.8j
            a = complex(tracefn.F_findim(par, nu, lam))
            b = complex(weyl_denominator(CTX, lam)) \
                * complex(character(CTX, -nu - 1, lam))
            assert abs(a - b) < 1e-12 * abs(b)

    def test_corollary_symmetry(self):
        # dual-evaluation symmetry at integral points
        for m in (1, 2):
            par = params(m)
            V = uqsl2.irreducible(CTX, 2 * m)
            Vs = uqsl2.right_dual(CTX, V)
            mu, nu = -(m + 8), -(m + 9)
            psi_dual = uqsl2.findim_trace_psi(CTX, -nu - 1, float(mu), m, module=Vs)
            lhs = complex(weyl_denominator(CTX, float(mu))) * complex(psi_dual) \
                * complex(tracefn.Q_closed_inv(par, nu))
            rhs = complex(tracefn.F_findim(par, mu, float(nu)))
            assert abs(lhs - rhs) < 1e-9 * max(abs(lhs), abs(rhs))

    def test_domain(self):
        with pytest.raises(DomainError):
            tracefn.F_findim(params(2), -2, 0.3)


class TestPoles:
    def test_pole_list(self):
        assert tracefn.pole_list(params(0)) == []
        assert [p for p, _ in tracefn.pole_list(params(1))] == [1.0]
        assert [p for p, _ in tracefn.pole_list(params(3))] == [1.0, 2.0, 3.0]
        assert tracefn.pole_list(params(2))[0][1] == CTX.kappa

    def test_poles_simple(self):
        # residue nonzero; (lam - k)^2 F -> 0 on shrinking circles
        par = params(3)
        mu = 0.43
        for k, _ in tracefn.pole_list(par):
            def f(lam):
                return tracefn.F_closed(par, lam, mu)
            r = residue_at(f, k, radius=0.2, n_points=256)
            assert abs(r) > 1e-8
            for rad in (0.2, 0.1, 0.05):
                ring = k + rad * np.exp(2j * np.pi * np.arange(64) / 64)
                second = np.max(np.abs((ring - k) ** 2 * f(ring)))
                assert second < 4 * rad * abs(r)
