"""Graded/uniform composite grids and the 4th-order cumulative rule."""

import numpy as np
import pytest
from scipy.integrate import quad

from matsl import DomainError, Grid, build_grid, cumquad4


def test_cumquad4_exact_on_cubics():
    n = 17
    x = np.linspace(0.0, 1.0, n + 1)
    F = 3 * x**3 - x**2 + 2 * x - 5
    exact = 0.75 * x**4 - x**3 / 3 + x**2 - 5 * x
    out = cumquad4(F, 1.0 / n)
    assert np.max(np.abs(out - exact)) < 1e-14


def test_cumquad4_fourth_order():
    anti = lambda x: (np.exp(x) * (np.sin(4 * x) - 4 * np.cos(4 * x))) / 17
    errs = []
    for n in (40, 80, 160):
        x = np.linspace(0.0, 2.0, n + 1)
        out = cumquad4(np.exp(x) * np.sin(4 * x), 2.0 / n)
        errs.append(abs(out[-1] - (anti(2.0) - anti(0.0))))
    assert errs[0] / errs[1] > 12
    assert errs[1] / errs[2] > 12


def test_grid_cumint_singular_endpoint():
    nu = 0.7
    grid = build_grid(2.8, [nu, 0.3], rho=3.0)
    f = np.zeros_like(grid.x)
    f[1:] = grid.x[1:] ** (1 - 2 * nu) * np.cos(3 * grid.x[1:])
    got = grid.cumint(f.astype(complex))
    for idx in (grid.na // 2, grid.na, -1):
        ref, _ = quad(lambda t: t ** (1 - 2 * nu) * np.cos(3 * t), 0,
                      grid.x[idx], epsabs=1e-13, epsrel=1e-13, limit=200)
        assert abs(got[idx] - ref) < 5e-9


def test_grid_scales_with_rho():
    g_small = build_grid(2.8, [0.5], rho=2.0)
    g_big = build_grid(2.8, [0.5], rho=80.0)
    assert g_big.nb > 2 * g_small.nb
    assert g_big.x_c < g_small.x_c


def test_index_at():
    grid = build_grid(1.0, [0.5], rho=1.0)
    assert grid.x[grid.index_at(0.73)] == pytest.approx(0.73, abs=0.01)


def test_block_validation():
    with pytest.raises(DomainError):
        Grid.build(T=1.0, gamma=3.0, x_c=1.5, na=20, nb=20)
    with pytest.raises(DomainError):
        Grid.build(T=1.0, gamma=3.0, x_c=0.5, na=4, nb=20)
    with pytest.raises(DomainError):
        cumquad4(np.ones(3), 0.1)
