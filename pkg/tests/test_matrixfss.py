"""Matrix Bessel-type solutions: Wronskian structure, boundary behavior,
residuals, analyticity."""

import numpy as np
import pytest

from matsl import (
    DomainError,
    Potential,
    SingularOrder,
    basis_for,
    build_diagonal,
    build_grid,
    entirety_probe,
    eval_jost,
    matnorm,
    solve_S,
    solve_S_star,
    volterra_residual,
    wronskian,
)
from matsl.fitting import loglog_slope

LAMBDAS = [2.0 + 0.4j, 16.0]


def _wronskian_block_error(order, Q, lam, grid):
    S = {j: solve_S(order, Q, lam, grid, j) for j in (1, 2)}
    Ss = {j: solve_S_star(order, Q, lam, grid, j) for j in (1, 2)}
    eye = np.eye(order.m)
    sl = slice(grid.na // 2, None)
    errs = [
        matnorm(wronskian(Ss[1].values, Ss[1].derivs,
                          S[2].values, S[2].derivs)[sl] - eye).max(),
        matnorm(wronskian(Ss[2].values, Ss[2].derivs,
                          S[1].values, S[1].derivs)[sl] + eye).max(),
        matnorm(wronskian(Ss[1].values, Ss[1].derivs,
                          S[1].values, S[1].derivs)[sl]).max(),
        matnorm(wronskian(Ss[2].values, Ss[2].derivs,
                          S[2].values, S[2].derivs)[sl]).max(),
    ]
    return max(float(e) for e in errs)


class TestDiagonalFamilies:
    def test_m1_reduces_to_scalar(self):
        order = SingularOrder.from_nu([0.6])
        grid = build_grid(1.5, order.nu, rho=2.0)
        ev = build_diagonal(order, "E", 1, grid, 2.0)
        idx = grid.index_at(1.0)
        v, d = eval_jost(order.bases[0].order, 1, grid.x[idx : idx + 1], 2.0)
        assert abs(ev.values[idx, 0, 0] - v[0]) < 1e-13
        assert abs(ev.derivs[idx, 0, 0] - d[0]) < 1e-13

    def test_off_diagonal_zero(self):
        order = SingularOrder.from_nu([0.7, 0.3])
        grid = build_grid(2.0, order.nu, rho=1.5)
        ev = build_diagonal(order, "C", 2, grid, 1.5)
        off = ev.values.copy()
        off[:, np.arange(2), np.arange(2)] = 0.0
        assert np.max(np.abs(off)) == 0.0

    def test_c_pair_unit_wronskian(self):
        order = SingularOrder.from_nu([0.7, 0.3])
        grid = build_grid(2.0, order.nu, rho=1.5)
        c1 = build_diagonal(order, "C", 1, grid, 1.5)
        c2 = build_diagonal(order, "C", 2, grid, 1.5)
        w = wronskian(c1.values, c1.derivs, c2.values, c2.derivs)[5:]
        assert matnorm(w - np.eye(2)).max() < 1e-10

    def test_nonincreasing_required(self):
        with pytest.raises(DomainError):
            SingularOrder.from_nu([0.3, 0.7])


class TestSolveS:
    def test_zero_potential_returns_series(self, p_mixed):
        order = p_mixed.order
        grid = build_grid(p_mixed.T, order.nu, rho=2.0)
        s = solve_S(order, Potential.zero(2), 4.0, grid, 1)
        c = build_diagonal(order, "C", 1, grid, 2.0)
        assert np.array_equal(s.values, c.values)
        assert s.iterations == 0

    @pytest.mark.parametrize("lam", LAMBDAS)
    def test_wronskian_blocks(self, p_mixed, lam):
        grid = build_grid(p_mixed.T, p_mixed.order.nu, rho=np.sqrt(abs(lam)))
        assert _wronskian_block_error(p_mixed.order, p_mixed.Q, lam, grid) < 1e-8

    def test_volterra_residual(self, p_mixed):
        lam = 2.0 + 0.4j
        grid = build_grid(p_mixed.T, p_mixed.order.nu, rho=np.sqrt(2.0))
        for j in (1, 2):
            ev = solve_S(p_mixed.order, p_mixed.Q, lam, grid, j)
            assert volterra_residual(p_mixed.order, p_mixed.Q, ev) < 1e-11
            evs = solve_S_star(p_mixed.order, p_mixed.Q, lam, grid, j)
            assert volterra_residual(p_mixed.order, p_mixed.Q, evs) < 1e-11

    def test_small_x_law(self, p_mixed):
        # column-relative deviation from C_j decays faster than x^{2 nu_1}
        order = p_mixed.order
        lam = 4.0
        grid = build_grid(p_mixed.T, order.nu, rho=2.0)
        s1 = solve_S(order, p_mixed.Q, lam, grid, 1)
        c1 = build_diagonal(order, "C", 1, grid, 2.0)
        # window of graded nodes away from roundoff but well below x_c
        idx = [grid.na // 3 + 5 * i for i in range(8)]
        for q in range(order.m):
            xs = grid.x[idx]
            dev = np.array([
                np.max(np.abs((s1.values[i, :, q] - c1.values[i, :, q])))
                / np.max(np.abs(c1.values[i, :, q])) for i in idx])
            slope = loglog_slope(xs, dev)
            assert slope > 2 * order.nu[0] - 0.1

    def test_column_scaling_bounded_at_zero(self, p_mixed):
        order = p_mixed.order
        grid = build_grid(p_mixed.T, order.nu, rho=2.0)
        s1 = solve_S(order, p_mixed.Q, 4.0, grid, 1)
        for q in range(order.m):
            scaled = [np.max(np.abs(s1.values[i, :, q]))
                      * grid.x[i] ** (-order.mu1[q]) for i in (1, 2, 3)]
            assert np.all(np.isfinite(scaled))
            assert max(scaled) < 10.0


class TestEntirety:
    def test_zero_potential_loop(self, p_closed):
        order = p_closed.order
        grid = build_grid(p_closed.T, order.nu, rho=1.5)
        res = entirety_probe(order, p_closed.Q, grid, 1, x_fixed=2.0,
                             center=0.5, radius=1.0, nodes=24)
        assert res < 1e-10

    def test_generic_potential_loop(self, p_mixed):
        grid = build_grid(p_mixed.T, p_mixed.order.nu, rho=1.5)
        res = entirety_probe(p_mixed.order, p_mixed.Q, grid, 1, x_fixed=2.0,
                             center=0.5, radius=1.0, nodes=24)
        assert res < 1e-8

    def test_loop_refinement_consistency(self, p_mixed):
        # residual must not grow under quadrature refinement
        grid = build_grid(p_mixed.T, p_mixed.order.nu, rho=1.5)
        r24 = entirety_probe(p_mixed.order, p_mixed.Q, grid, 2, x_fixed=1.8,
                             center=0.3, radius=0.8, nodes=24)
        r48 = entirety_probe(p_mixed.order, p_mixed.Q, grid, 2, x_fixed=1.8,
                             center=0.3, radius=0.8, nodes=48)
        assert r48 < max(r24, 1e-9) * 1.5
