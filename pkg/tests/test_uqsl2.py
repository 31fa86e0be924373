import numpy as np
import pytest

from qtrace.errors import (Divergent, DomainError, NoIntertwiner,
                           ResonantWeight, TruncationTooSmall)
from qtrace.qnum import QContext, qint, qp_factory
from qtrace import uqsl2

CTX = QContext(0.5)
RNG = np.random.default_rng(7)


def commutator_residual(ctx, V):
    comm = V.E @ V.F - V.F @ V.E
    target = np.diag([complex(qint(ctx, int(w))) for w in V.weights])
    return np.max(np.abs(comm - target))


class TestModules:
    def test_relations(self):
        for n in range(0, 7):
            assert commutator_residual(CTX, uqsl2.irreducible(CTX, n)) < 1e-12

    def test_dual_relations(self):
        V = uqsl2.irreducible(CTX, 4)
        for dual in (uqsl2.right_dual, uqsl2.left_dual):
            W = dual(CTX, V)
            assert commutator_residual(CTX, W) < 1e-12
            assert list(W.weights) == [-w for w in V.weights]

    def test_qh_diagonal(self):
        V = uqsl2.irreducible(CTX, 3)
        qh = V.qh(CTX)
        assert np.allclose(np.diag(np.diag(qh)), qh)
        assert np.allclose(np.diag(qh), 0.5 ** V.weights)

    def test_zero_index(self):
        assert uqsl2.irreducible(CTX, 4).zero_index == 2
        with pytest.raises(DomainError):
            _ = uqsl2.irreducible(CTX, 3).zero_index

    def test_verma_action(self):
        # E F - F E = [h] on the truncated ladder (away from the cut level)
        mu = 0.37 - 0.8j
        E, F, w = uqsl2.verma_action(CTX, mu, 12)
        comm = (E @ F - F @ E)[:12, :12]
        target = np.diag([complex(qint(CTX, mu - 2 * k)) for k in range(12)])
        resid = np.abs(comm - target) / np.maximum(np.abs(target), 1.0)
        assert np.max(resid) < 1e-12

    def test_singular_vector(self):
        # for dominant integral mu the vector f^(mu+1) x is singular
        for mu in (2, 5):
            E, F, w = uqsl2.verma_action(CTX, mu, mu + 3)
            v = np.zeros(mu + 4, dtype=complex)
            v[mu + 1] = 1.0
            assert np.max(np.abs(E @ v)) < 1e-12


class TestIntertwiner:
    def test_trivial_module(self):
        V = uqsl2.irreducible(CTX, 0)
        c = uqsl2.intertwiner_coeffs(CTX, V, 0.7 + 0.2j, 0)
        assert c.shape == (1, 1)
        assert c[0, 0] == 1.0

    def test_singularity_residual(self):
        for m in (1, 2, 3):
            V = uqsl2.irreducible(CTX, 2 * m)
            for _ in range(5):
                mu = RNG.normal() * 2 + 1j * RNG.normal()
                c = uqsl2.intertwiner_coeffs(CTX, V, mu, V.zero_index)
                assert uqsl2.singularity_residual(CTX, V, mu, c, V.zero_index) < 1e-11

    def test_weight_homogeneity(self):
        V = uqsl2.irreducible(CTX, 4)
        c = uqsl2.intertwiner_coeffs(CTX, V, 1.3 + 0.4j, V.zero_index)
        for k in range(len(c)):
            support = np.nonzero(np.abs(c[k]) > 0)[0]
            assert all(V.weights[j] == 2 * k for j in support)

    def test_resonant_weight(self):
        V = uqsl2.irreducible(CTX, 2)
        with pytest.raises(ResonantWeight):
            uqsl2.intertwiner_coeffs(CTX, V, 0.0, V.zero_index)

    def test_truncation_stability(self):
        # the triangular recursion makes d_k independent of the target K
        V = uqsl2.irreducible(CTX, 2)
        mu = 0.62 - 0.3j
        d1 = uqsl2.trace_diag_coeffs(CTX, V, mu, 40)
        d2 = uqsl2.trace_diag_coeffs(CTX, V, mu, 50)
        assert np.max(np.abs(d1 - d2[:41])) == 0.0


class TestTraceSeries:
    def test_trivial_is_verma_character(self):
        qp = qp_factory(CTX)
        for _ in range(5):
            lam = -2.5 - RNG.random() + 1j * RNG.normal()
            mu = RNG.normal() + 1j * RNG.normal()
            a = uqsl2.trace_series_psi(CTX, lam, mu, 0, K=200)
            b = qp(lam * mu) / (1 - qp(-2 * lam))
            assert abs(a - b) < 1e-12 * abs(b)

    def test_three_dimensional_module(self):
        # frozen closed form for V = L_2
        qp = qp_factory(CTX)
        lam, mu = -3 + 0.7j, 0.4
        a = uqsl2.trace_series_psi(CTX, lam, mu, 1, K=200)
        b = qp(lam * mu) / (1 - qp(-2 * lam)) * (
            1 + (qp(2) - qp(-2)) * qp(-2 * lam)
            / ((1 - qp(2 * mu)) * (1 - qp(-2 * (lam - 1)))))
        assert abs(a - b) < 1e-12 * abs(b)

    def test_divergent(self):
        with pytest.raises(Divergent):
            uqsl2.trace_series_psi(CTX, 0.5, 0.3, 1)

    def test_vectorized(self):
        lam = np.array([-3.0 + 0.1j, -2.5 - 0.4j])
        v = uqsl2.trace_series_psi(CTX, lam, 0.3, 1, K=150)
        assert v.shape == (2,)
        assert abs(v[0] - uqsl2.trace_series_psi(CTX, lam[0], 0.3, 1, K=150)) < 1e-14


class TestFindimTrace:
    def test_trivial_module_is_character(self):
        from qtrace.qnum import character
        for nu in (0, 3, 6):
            lam = 0.4 + 0.9j
            a = uqsl2.findim_trace_psi(CTX, nu, lam, 0)
            assert abs(a - character(CTX, nu, lam)) < 1e-12 * abs(a)

    def test_against_direct_solve(self):
        # brute-force matrix intertwiner as the oracle, including nu = m
        for (nu, m) in ((1, 1), (2, 1), (4, 2), (3, 3)):
            lam = 0.3 - 0.6j
            a = uqsl2.findim_trace_psi(CTX, nu, lam, m)
            b = uqsl2.findim_trace_direct(CTX, nu, m, lam)
            assert abs(a - b) < 1e-10 * max(abs(a), 1.0)

    def test_no_intertwiner(self):
        with pytest.raises(NoIntertwiner):
            uqsl2.findim_trace_psi(CTX, 1, 0.3, 2)

    def test_mp_matches(self):
        import mpmath as mp
        with mp.workdps(40):
            a = complex(uqsl2.findim_trace_psi(CTX, 8, mp.mpc(0.2, 0.5), 1, use_mp=True))
        b = complex(uqsl2.findim_trace_psi(CTX, 8, 0.2 + 0.5j, 1))
        assert abs(a - b) < 1e-12 * abs(b)

    def test_evaluator_matches(self):
        ev = uqsl2.findim_psi_evaluator(CTX, 8, 1)
        lam = 0.1 + 0.7j
        assert abs(complex(ev(lam)) - complex(uqsl2.findim_trace_psi(CTX, 8, lam, 1))) < 1e-13


class TestFusionAndQ:
    def test_trivial_factors(self):
        U = uqsl2.irreducible(CTX, 2)
        V0 = uqsl2.irreducible(CTX, 0)
        mu = 0.9 + 0.2j
        assert np.max(np.abs(uqsl2.fusion_matrix(CTX, U, V0, mu) - np.eye(3))) < 1e-12
        assert np.max(np.abs(uqsl2.fusion_matrix(CTX, V0, U, mu) - np.eye(3))) < 1e-12

    def test_triangular(self):
        W = uqsl2.irreducible(CTX, 2)
        V = uqsl2.irreducible(CTX, 4)
        J = uqsl2.fusion_matrix(CTX, W, V, 0.8 + 0.1j)
        dW, dV = W.dim, V.dim
        for a in range(dW):
            for b in range(dV):
                col = J[:, a * dV + b].reshape(dW, dV)
                assert abs(col[a, b] - 1.0) < 1e-12
                # entries with W-weight not lower than w_a vanish (except lead)
                for i in range(dW):
                    for c in range(dV):
                        if W.weights[i] >= W.weights[a] and (i, c) != (a, b):
                            assert abs(col[i, c]) < 1e-12

    def test_q_operator_trivial(self):
        assert abs(uqsl2.q_operator(CTX, 0, 0.77) - 1.0) < 1e-14

    def test_q_operator_analytic_m1(self):
        # fusion contraction for the 3-dimensional module:
        # Q(nu) = (q^(2 nu) - q^-4)/(q^(2 nu) - 1)
        qp = qp_factory(CTX)
        for nu in (0.3, 1.7 - 0.2j, -2.4 + 0.6j):
            a = uqsl2.q_operator(CTX, 1, nu)
            b = (qp(2 * nu) - qp(-4)) / (qp(2 * nu) - 1)
            assert abs(a - b) < 1e-12 * abs(b)

    def test_q_swap_invariance(self):
        # the Q scalar is insensitive to the V <-> V* swap: contracting
        # J_(V,V*)(nu)(v (x) v*) with the module-map evaluation on
        # V (x) V* (which carries the q^h twist, since S^2 = Ad q^h)
        # reproduces the J_(V*,V) contraction
        qp = qp_factory(CTX)
        for m in (1, 2):
            V = uqsl2.irreducible(CTX, 2 * m)
            Vs = uqsl2.right_dual(CTX, V)
            nu = 0.45 - 0.3j
            a = uqsl2.q_operator(CTX, m, nu)
            J = uqsl2.fusion_matrix(CTX, V, Vs, nu)
            zi, zj = V.zero_index, Vs.zero_index
            col = J[:, zi * Vs.dim + zj].reshape(V.dim, Vs.dim)
            b = sum(col[i, i] * qp(int(V.weights[i])) for i in range(V.dim))
            assert abs(a - b) < 1e-10 * abs(a)


class TestDynamicalWeyl:
    def test_trivial(self):
        assert uqsl2.dynamical_weyl(CTX, 0, 5) == pytest.approx(1.0)
        assert uqsl2.dynamical_weyl_scalar(CTX, 0, 0.3 + 1j) == pytest.approx(1.0)

    def test_recursion_vs_continuation(self):
        for m in (1, 2, 3):
            for mu in range(m + 1, m + 16):
                a = uqsl2.dynamical_weyl(CTX, m, mu)
                b = complex(uqsl2.dynamical_weyl_scalar(CTX, m, mu))
                assert abs(a - b) < 1e-11 * abs(b)

    def test_cocycle(self):
        for m in (1, 2, 3):
            for mu in range(m + 5, m + 16):
                a = uqsl2.dynamical_weyl(CTX, m, mu)
                b = complex(uqsl2.dynamical_weyl_scalar(CTX, m, -mu - 2))
                assert abs(a * b - 1.0) < 1e-9

    def test_truncation_guard(self):
        with pytest.raises(TruncationTooSmall):
            uqsl2.dynamical_weyl(CTX, 1, 8, K=4)

    def test_resonant(self):
        with pytest.raises(ResonantWeight):
            uqsl2.dynamical_weyl_scalar(CTX, 1, 0.0)

    def test_stability_under_truncation(self):
        a = uqsl2.dynamical_weyl(CTX, 1, 12, K=15)
        b = uqsl2.dynamical_weyl(CTX, 1, 12, K=25)
        assert a == b


class TestExchange:
    def test_r_matrix_intertwines(self):
        U = uqsl2.irreducible(CTX, 2)
        for n in (1, 2, 3, 4):
            V = uqsl2.irreducible(CTX, n)
            R = uqsl2.universal_r(CTX, U, V)
            for gen in ("E", "F", "qh"):
                d = uqsl2.coproduct(CTX, U, V, gen)
                dop = uqsl2.coproduct(CTX, U, V, gen, opposite=True)
                assert np.max(np.abs(R @ d - dop @ R)) < 1e-12

    def test_exchange_trivial(self):
        U = uqsl2.irreducible(CTX, 2)
        V0 = uqsl2.irreducible(CTX, 0)
        R = uqsl2.exchange_matrix(CTX, U, V0, 0.4 + 0.7j)
        assert np.max(np.abs(R - np.eye(3))) < 1e-12

    def test_partial_trace_additivity(self):
        m = 2
        U = uqsl2.irreducible(CTX, 2)
        V = uqsl2.irreducible(CTX, 2 * m)
        lam = 1.1 + 0.3j
        R = uqsl2.exchange_matrix(CTX, U, V, -lam - 1)
        zi = V.zero_index
        total = sum(R[a * V.dim + zi, a * V.dim + zi] for a in range(U.dim))
        coeffs = uqsl2.mr_operator_coeffs(CTX, m, lam)
        assert abs(total - sum(coeffs.values())) < 1e-12 * abs(total)

    def test_mr_trivial_eigenfunction(self):
        # with trivial V the operator acts on plain exponentials
        from qtrace.qnum import character
        qp = qp_factory(CTX)
        lam, nu = 0.9 + 0.2j, 0.37 - 0.5j
        a = uqsl2.mr_operator_coeffs(CTX, 0, lam)
        lhs = sum(a[w] * qp(-(lam + w) * nu) for w in (2, 0, -2))
        rhs = complex(character(CTX, 2, -nu)) * qp(-lam * nu)
        assert abs(lhs - rhs) < 1e-12 * abs(rhs)


class TestOracleAgreementInvariant:
    def test_series_vs_closed_50_points(self):
        # 50 random (lam, mu) with Re lam <= -2 for each m
        from qtrace import tracefn
        rng = np.random.default_rng(99)
        for m in (1, 2, 3):
            par = tracefn.TraceFunctionParams(CTX, m)
            worst = 0.0
            for _ in range(50):
                lam = -2.0 - 3 * rng.random() + 1j * rng.normal()
                mu = rng.normal() * 1.5 + 1j * rng.normal()
                a = uqsl2.trace_series_psi(CTX, lam, mu, m, K=300)
                b = complex(tracefn.psi_from_closed(par, lam, mu))
                worst = max(worst, abs(a - b) / abs(b))
            assert worst <= 1e-9
