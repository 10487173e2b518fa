"""Boundary problem, characteristic function, Weyl matrix, spectral data."""

import numpy as np
import pytest

from matsl import (
    Potential,
    PoleProximityError,
    SingularOrder,
    BoundaryProblem,
    build_grid,
    char_det,
    count_inside,
    default_radius,
    frac_parts,
    group_weights,
    locate_contour,
    locate_eigenvalues,
    locate_low,
    matnorm,
    phi,
    residues_per_root,
    rho0_center,
    sigma_forms,
    solve_S,
    spectral_classes,
    theta_constants,
    weyl,
    weyl_partial_fraction,
)
from matsl.spectral import _v_forms


class TestCharDet:
    def test_closed_form(self, p_closed):
        # Delta(rho^2) = -rho sin(pi rho) for the elementary problem
        for rho in (0.7, 2.3, 11.4, 29.9):
            got = char_det(p_closed, rho**2)
            assert abs(got - (-rho * np.sin(np.pi * rho))) < 1e-10 * max(1, rho)

    def test_generic_path_matches_closed_form(self, p_closed):
        # a potential tagged polynomial-with-zero-coefficients forces the
        # full Picard/quadrature machinery through the same closed answer
        forced = BoundaryProblem(
            order=p_closed.order, Q=Potential.polynomial([np.zeros((1, 1))]),
            h=p_closed.h, H=p_closed.H, T=p_closed.T)
        for rho in (2.3, 11.4, 23.7, 37.2):
            got = char_det(forced, rho**2)
            ref = -rho * np.sin(np.pi * rho)
            assert abs(got - ref) < 2e-9 * max(1.0, rho), rho

    def test_entire_in_lambda(self, p_mixed):
        # closed-loop integral of Delta over a lambda circle vanishes
        grid = build_grid(p_mixed.T, p_mixed.order.nu, rho=2.0)
        k = 20
        th = 2 * np.pi * np.arange(k) / k
        vals = np.array([char_det(p_mixed, 2.0 + 1.5 * np.exp(1j * t), grid)
                         for t in th])
        loop = np.sum(vals * np.exp(1j * th)) * 1.5 * 2 * np.pi / k
        assert abs(loop) < 1e-9


class TestWeyl:
    def test_closed_form(self, p_closed):
        for rho in (0.4, 3.3, 8.6):
            w = weyl(p_closed, rho**2)
            ref = np.cos(np.pi * rho) / (rho * np.sin(np.pi * rho))
            assert abs(w.M[0, 0] - ref) < 1e-10

    def test_pole_proximity_error(self, p_closed):
        with pytest.raises(PoleProximityError):
            weyl(p_closed, (4.0 + 1e-13) ** 2)

    def test_diagonal_dominance_at_large_rho(self, p_mixed):
        # off-diagonal entries of M decay relative to the diagonal
        from matsl.fitting import loglog_slope
        rhos = [6.0 * 1.6**i for i in range(5)]
        offs = []
        for rho in rhos:
            grid = build_grid(p_mixed.T, p_mixed.order.nu, rho=rho)
            M = weyl(p_mixed, rho**2 + 0.31, grid).M
            off = M.copy()
            off[np.arange(2), np.arange(2)] = 0.0
            offs.append(float(matnorm(off)) / float(matnorm(M)))
        assert loglog_slope(rhos, offs) <= -p_mixed.order.beta_exp + 0.1


class TestSigmaForms:
    @pytest.mark.parametrize("lam", [2.0 + 0.4j, 16.0])
    def test_sigma_of_S_is_kronecker(self, p_mixed, lam):
        order = p_mixed.order
        grid = build_grid(p_mixed.T, order.nu, rho=np.sqrt(abs(lam)))
        eye = np.eye(order.m)
        s1 = solve_S(order, p_mixed.Q, lam, grid, 1)
        s2 = solve_S(order, p_mixed.Q, lam, grid, 2)
        sig1_s1, sig2_s1 = sigma_forms(p_mixed, s1)
        sig1_s2, sig2_s2 = sigma_forms(p_mixed, s2)
        assert matnorm(sig1_s1 - eye) < 1e-8
        assert matnorm(sig2_s1) < 1e-8
        assert matnorm(sig1_s2) < 1e-8
        assert matnorm(sig2_s2 - eye) < 1e-8

    def test_phi_initial_forms(self, p_mixed):
        lam = 2.0 + 0.4j
        ph = phi(p_mixed, lam)
        s1f, s2f = sigma_forms(p_mixed, ph)
        assert matnorm(s1f - np.eye(2)) < 1e-8
        assert matnorm(s2f - p_mixed.h) < 1e-8

    def test_h_zero_phi_is_s1(self, p_closed):
        lam = 3.0
        ph = phi(p_closed, lam)
        grid = ph.grid
        s1 = solve_S(p_closed.order, p_closed.Q, lam, grid, 1)
        assert np.array_equal(ph.values, s1.values)


class TestLattice:
    def test_frac_parts(self):
        order = SingularOrder.from_nu([0.5])
        assert frac_parts(order)[0] == pytest.approx(0.0)
        order = SingularOrder.from_nu([0.7, 0.3])
        assert np.allclose(sorted(frac_parts(order)), [0.1, 0.9])

    def test_classes_group_equal_fracs(self):
        order = SingularOrder.from_nu([0.7, 0.7])
        cls = spectral_classes(order)
        assert len(cls) == 1
        assert cls[0][1] == (0, 1)

    def test_centers_and_radius(self, p_closed):
        assert rho0_center(p_closed, 4, 0.0) == pytest.approx(4.0)
        assert default_radius(p_closed) == pytest.approx(0.2, abs=1e-12)


class TestLocate:
    def test_closed_form_eigenvalues(self, p_closed):
        data = locate_eigenvalues(p_closed, range(1, 9))
        for d in data:
            assert d.count == 1
            assert abs(d.rho - d.n) < 1e-10

    def test_pole_simplicity_distinct_fracs(self, p_mixed):
        # distinct fractional parts: every asymptotic contour holds 1 root
        data = locate_eigenvalues(p_mixed, [12, 13])
        assert all(d.count == 1 for d in data)

    def test_cluster_counts(self, p_cluster):
        d = locate_contour(p_cluster, 12, *spectral_classes(p_cluster.order)[0])
        assert d.count == 2
        assert len(d.roots) == 2

    def test_low_region_includes_lambda_zero(self, p_closed):
        # the elementary problem has an eigenvalue exactly at lambda = 0
        data = locate_low(p_closed, 0.5)
        assert len(data) == 1
        assert abs(data[0].roots[0][0]) < 1e-6

    def test_count_inside_shift_invariance(self, p_scalar03):
        # eigenvalue counts in |lambda| < R match the zero-data problem
        zero = p_scalar03.with_zero_data()
        for n_gap in (5, 8):
            R = (np.pi / p_scalar03.T * (n_gap + 0.6)) ** 2
            assert count_inside(p_scalar03, R) == count_inside(zero, R)


class TestWeights:
    def test_closed_form_weights(self, p_closed):
        data = locate_eigenvalues(p_closed, [3, 7])
        for d in data:
            group_weights(p_closed, d)
            assert abs(d.group_weight[0, 0] - 2 / np.pi) < 1e-9

    def test_node_doubling_converged(self, p_closed):
        d = locate_eigenvalues(p_closed, [5])[0]
        group_weights(p_closed, d)
        assert d.weight_nodes <= 64

    def test_theta_matches_closed_form(self, p_closed):
        th = theta_constants(p_closed)
        assert abs(th.theta[0] - 2 / np.pi) < 1e-12

    def test_diagonal_problem_weight_support(self, p_diag0):
        # decoupled channels: group weight supported on the class channel
        cls = spectral_classes(p_diag0.order)
        d = locate_contour(p_diag0, 12, *cls[0])
        group_weights(p_diag0, d)
        q = d.qs[0]
        other = 1 - q
        on = abs(d.group_weight[q, q])
        assert on > 0
        assert abs(d.group_weight[other, other]) < 1e-8 * on
        assert abs(d.group_weight[q, other]) < 1e-8 * on

    def test_residue_matches_contour_for_simple_pole(self, p_closed):
        # Richardson-extrapolated local residue of M vs the contour value
        d = locate_eigenvalues(p_closed, [4])[0]
        group_weights(p_closed, d)
        lam_p = d.lam
        vals = []
        for eps in (1e-3, 5e-4, 2.5e-4):
            lam = lam_p + eps
            vals.append((lam - lam_p) * weyl(p_closed, lam).M[0, 0])
        # two Richardson steps on the O(eps) error
        r1 = 2 * vals[1] - vals[0]
        r2 = 2 * vals[2] - vals[1]
        extrap = (4 * r2 - r1) / 3
        assert abs(extrap - d.group_weight[0, 0]) < 1e-7


class TestPartialFraction:
    def test_empty_data_gives_zero(self, p_closed):
        total, trend = weyl_partial_fraction(p_closed, -1.0, [])
        assert np.array_equal(total, np.zeros((1, 1)))
        assert trend == []

    def test_closed_form_convergence_trend(self, p_closed):
        # sum over located spectrum approaches cot(pi sqrt(lam))/sqrt(lam)
        data = locate_low(p_closed, 0.5) + locate_eigenvalues(p_closed,
                                                              range(1, 15))
        lam = -1.0
        total, trend = weyl_partial_fraction(p_closed, lam, data)
        ref = weyl(p_closed, lam).M[0, 0]
        # tail of sum_{n>N} (2/pi)/(lam - n^2) ~ 2/(pi N)
        assert trend[-1][1] < 0.05
        assert trend[-1][1] < trend[0][1]
        # deviations shrink monotonically once the low terms are in
        devs = [t[1] for t in trend[2:]]
        assert all(devs[i + 1] <= devs[i] + 1e-12 for i in range(len(devs) - 1))
        assert abs((total[0, 0] - ref) + 2 / (np.pi * 14)) < 0.01


class TestVForms:
    def test_vphi_matches_closed(self, p_closed):
        rho = 2.6
        vphi, vs2 = _v_forms(p_closed, rho**2)
        assert abs(vphi[0, 0] - (-rho * np.sin(np.pi * rho))) < 1e-12
        assert abs(vs2[0, 0] - np.cos(np.pi * rho)) < 1e-12
