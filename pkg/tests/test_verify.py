import numpy as np
import pytest

from qtrace.errors import DomainError, NearPole
from qtrace.qnum import QContext, qp_factory
from qtrace import verify

CTX = QContext(0.5)


class TestOrthogonality:
    def test_trivial_module_fourier(self):
        # m = 0 is plain Fourier orthogonality on the torus
        r = verify.check_orthogonality(CTX, 0, 0.3, 0.3)
        assert r.passed and abs(r.lhs - 1.0) < 1e-12
        r = verify.check_orthogonality(CTX, 0, 0.3, 2.3)
        assert r.passed and abs(r.lhs) < 1e-12

    def test_lattice_condition(self):
        with pytest.raises(DomainError):
            verify.check_orthogonality(CTX, 1, 0.3, 0.9)

    def test_contour_guard(self):
        with pytest.raises(NearPole):
            verify.check_orthogonality(CTX, 2, 0.3, 0.3, xi=2.2)

    def test_spec_example_offdiag(self):
        r = verify.check_orthogonality(CTX, 1, 0.3, 2.3)
        assert r.passed and abs(r.lhs) < 1e-9


class TestHeat:
    def test_trivial_module_analytic(self):
        # m = 0: complete the square; the identity is exact
        r = verify.check_heat(CTX, 0, 0.7, -0.2)
        assert r.passed
        qp = qp_factory(CTX)
        ref = complex(qp(((0.7 + 0.2) ** 2) / 2.0))
        assert abs(r.lhs - ref) < 1e-10 * abs(ref)

    def test_m1(self):
        r = verify.check_heat(CTX, 1, 0.7, -0.2)
        assert r.passed and r.rel_err < 1e-8


class TestFindim:
    def test_m0_weyl_orthogonality(self):
        r = verify.check_orthogonality_findim(CTX, 0, 8, 8)
        assert r.passed and abs(r.lhs - 1.0) < 1e-12
        r = verify.check_orthogonality_findim(CTX, 0, 8, 9)
        assert r.passed and abs(r.lhs) < 1e-12

    def test_m1_offdiag(self):
        r = verify.check_orthogonality_findim(CTX, 1, 8, 10)
        assert r.passed

    def test_domain(self):
        with pytest.raises(DomainError):
            verify.check_orthogonality_findim(CTX, 2, 1, 1)


class TestSmallChecks:
    def test_resonance_m0_vacuous(self):
        r = verify.check_resonance(CTX, 0)
        assert r.passed

    def test_kostant_small_q_stress(self):
        r = verify.check_kostant(QContext(0.1))
        assert r.passed

    def test_kostant_truncation_doubling(self):
        a = verify.check_kostant(CTX, truncation=60)
        b = verify.check_kostant(CTX, truncation=120)
        assert abs(a.lhs - b.lhs) < 1e-12 * abs(a.lhs)

    def test_residues_m0(self):
        r = verify.check_residues_and_chambers(CTX, 0)
        assert r.passed

    def test_mr_trivial(self):
        r = verify.check_mr_eigen_and_selfadjoint(CTX, 0)
        assert r.passed


class TestScans:
    def test_xi_scan_stability_orthogonality(self):
        m = 1
        vals = []
        for xi in (m + 5, m + 7, m + 10, m + 15):
            r = verify.check_orthogonality(CTX, m, 0.4, 0.4, xi=float(xi))
            assert r.passed
            vals.append(r.lhs)
        spread = max(abs(a - b) for a in vals for b in vals)
        assert spread < 1e-8 * abs(vals[0])

    def test_xi_scan_stability_heat(self):
        m = 1
        vals = []
        for xi in (m + 5, m + 10):
            r = verify.check_heat(CTX, m, 0.7, -0.2, xi=float(xi))
            assert r.passed
            vals.append(r.lhs)
        assert abs(vals[0] - vals[1]) < 1e-8 * abs(vals[0])

    @pytest.mark.parametrize("q", [0.3, 0.5, 0.7, 0.9])
    def test_q_scan(self, q):
        ctx = QContext(q)
        assert verify.check_orthogonality(ctx, 1, 0.4, 1.4).passed
        assert verify.check_heat(ctx, 1, 0.7, -0.2).passed
        assert verify.check_resonance(ctx, 1).passed
        assert verify.check_kostant(ctx).passed
        assert verify.check_weyl_character_formula(ctx, 1).passed
        assert verify.check_mr_eigen_and_selfadjoint(ctx, 1).passed
        assert verify.check_oracle_consistency(ctx, 1).passed


class TestSymmetryInvariant:
    def test_scalar_symmetry(self):
        # F(lam, mu) = F(mu, lam) in the scalar zero-weight setting
        from qtrace import tracefn
        rng = np.random.default_rng(2)
        for m in (0, 1, 2, 3):
            par = tracefn.TraceFunctionParams(CTX, m)
            pts = rng.normal(size=(50, 2)) * 2 + 1j * rng.normal(size=(50, 2))
            a = tracefn.F_closed(par, pts[:, 0], pts[:, 1])
            b = tracefn.F_closed(par, pts[:, 1], pts[:, 0])
            assert np.max(np.abs(a - b) / np.maximum(np.abs(a), np.abs(b))) < 1e-11


class TestDefaultGridAllChecks:
    """Every check passes at its defaults for m in 0..3 (q = 0.5)."""

    @pytest.mark.parametrize("m", [0, 1, 2, 3])
    def test_all_checks(self, m):
        mu_i, nu_i = m + 7, m + 8
        reports = [
            verify.check_oracle_consistency(CTX, m),
            verify.check_orthogonality(CTX, m, 0.4, 0.4),
            verify.check_orthogonality(CTX, m, 0.4, 2.4),
            verify.check_heat(CTX, m, 0.7, -0.2),
            verify.check_orthogonality_findim(CTX, m, mu_i, mu_i),
            verify.check_orthogonality_findim(CTX, m, mu_i, nu_i),
            verify.check_heat_findim(CTX, m, mu_i, nu_i),
            verify.check_resonance(CTX, m),
            verify.check_weyl_character_formula(CTX, m),
            verify.check_residues_and_chambers(CTX, m),
            verify.check_mr_eigen_and_selfadjoint(CTX, m),
            verify.check_transform_roundtrip(CTX, m),
        ]
        for r in reports:
            assert r.passed, f"{r.name} m={m}: {r.notes}"
