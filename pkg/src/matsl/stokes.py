"""Stokes multipliers connecting the Birkhoff and Bessel-type families.

Writing Y_k = S_1 B_k1 + S_2 B_k2 and using the Wronskian identities
<S_1*, S_2> = I, <S_2*, S_1> = -I (equal indices vanish), the multipliers
are extracted pointwise:

    B_k1 = -<S_2*, Y_k>,   B_k2 = <S_1*, Y_k>,

constant in the abscissa, which is cross-checked.  For Q = 0 they reduce
to D_j(rho) B0_kj with D_j = diag(rho^{mu_jq}) and B0_kj the diagonal of
scalar connection constants, and for general Q they approach that value
at rate O(rho^{-beta}).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .birkhoff import solve_Y
from .errors import AccuracyError
from .fitting import FitReport
from .grids import Grid, build_grid
from .matrixfss import (
    SingularOrder,
    solve_S,
    solve_S_star,
    wronskian,
)
from .potential import Potential, matnorm

B_ABSCISSA_FRACS = (0.55, 0.8)


def D_matrix(order: SingularOrder, rho, j: int):
    """diag(rho^{mu_jq}), principal branch."""
    return np.diag(complex(rho) ** order.mu(j).astype(complex))


def B0_matrix(order: SingularOrder, k: int, j: int):
    """Diagonal of per-channel connection constants beta0[k, j]."""
    return np.diag(np.array(
        [b.betas.beta[k - 1, j - 1] for b in order.bases], dtype=complex))


@dataclass
class StokesSet:
    """Stokes multipliers at one rho, with the solves that produced them."""

    rho: complex
    B: dict
    spread: float
    solves: dict = field(default_factory=dict, repr=False)

    def deviation(self, order, k, j):
        """|| (D_j B0_kj)^{-1} B_kj - I || in the entrywise max norm."""
        d = complex(self.rho) ** order.mu(j).astype(complex)
        b0 = np.array([b.betas.beta[k - 1, j - 1] for b in order.bases])
        scaled = self.B[(k, j)] / (d * b0)[:, None]
        return float(matnorm(scaled - np.eye(order.m)))


def compute_B(order: SingularOrder, Q: Potential, grid: Grid, rho,
              k=None, tol=1e-8) -> StokesSet:
    """Stokes multipliers B_kj(rho) by Wronskian extraction.

    Extraction happens at two interior abscissae; disagreement beyond tol
    (relative to the multiplier scale) raises an accuracy error.
    """
    rho = complex(rho)
    lam = rho * rho
    s1s = solve_S_star(order, Q, lam, grid, 1)
    s2s = solve_S_star(order, Q, lam, grid, 2)
    idx = [grid.index_at(f * grid.T) for f in B_ABSCISSA_FRACS]
    ks = (1, 2) if k is None else (k,)
    B = {}
    solves = {"S1*": s1s, "S2*": s2s}
    spread = 0.0
    for kk in ks:
        ysol = solve_Y(order, Q, grid, kk, rho)
        solves[f"Y{kk}"] = ysol
        yv, yd = ysol.Y.values, ysol.Y.derivs
        cands = []
        for i in idx:
            bk1 = -wronskian(s2s.values[i], s2s.derivs[i], yv[i], yd[i])
            bk2 = wronskian(s1s.values[i], s1s.derivs[i], yv[i], yd[i])
            cands.append((bk1, bk2))
        for jj, pair in enumerate(zip(*cands), start=1):
            a, b = pair
            scale = 1.0 + matnorm(a)
            mism = float(matnorm(a - b) / scale)
            spread = max(spread, mism)
            if mism > tol:
                raise AccuracyError(
                    f"Stokes extraction abscissa-dependent: {mism:.3g} "
                    f"for B[{kk},{jj}] at rho={rho:.6g}"
                )
            B[(kk, jj)] = a
    return StokesSet(rho=rho, B=B, spread=spread, solves=solves)


def reconstruction_residual(order: SingularOrder, Q: Potential, grid: Grid,
                            st: StokesSet, k: int) -> float:
    """Grid residual of Y_k - S_1 B_k1 - S_2 B_k2."""
    lam = st.rho * st.rho
    s1 = solve_S(order, Q, lam, grid, 1)
    s2 = solve_S(order, Q, lam, grid, 2)
    y = st.solves[f"Y{k}"].Y
    res = y.values - s1.values @ st.B[(k, 1)] - s2.values @ st.B[(k, 2)]
    scale = 1.0 + np.max(matnorm(y.values[1:]))
    return float(np.max(matnorm(res[1:])) / scale)


def verify_stokes_asymptotics(order: SingularOrder, Q: Potential, T,
                              rho_ladder, quad_tol=3e-9) -> FitReport:
    """Measure ||(D_j B0_kj)^{-1} B_kj(rho) - I|| along a rho ladder.

    The fitted log-log slopes should come out at or below -beta,
    beta = min(1, 2 nu_1).
    """
    rep = FitReport(kind="stokes-asymptotics", beta_exp=order.beta_exp)
    for rho in rho_ladder:
        grid = build_grid(T, order.nu, rho=rho, quad_tol=quad_tol)
        st = compute_B(order, Q, grid, rho)
        for (k, j) in st.B:
            rep.add(abs(rho), f"B{k}{j}", st.deviation(order, k, j))
    rep.fit_slopes()
    return rep


def verify_S_asymptotics(order: SingularOrder, Q: Potential, T, x,
                         rho_ladder, quad_tol=3e-9) -> FitReport:
    """Compare S_j and S_j' against their large-rho form.

    The reference combines exp(+-i rho x) with the diagonal connection
    constants.  Deviations are normalized by the amplitude scale (the
    pointwise reference has zeros) and averaged over a few abscissae
    around x, since the remainder itself oscillates in rho x.
    """
    rep = FitReport(kind="bessel-type-asymptotics", beta_exp=order.beta_exp)
    b011 = B0_matrix(order, 1, 1)
    b012 = B0_matrix(order, 1, 2)
    b021 = B0_matrix(order, 2, 1)
    b022 = B0_matrix(order, 2, 2)
    for rho in rho_ladder:
        rho = complex(rho)
        grid = build_grid(T, order.nu, rho=rho, quad_tol=quad_tol)
        idx = sorted({grid.index_at(f * x) for f in (0.8, 1.0, 1.2)
                      if 0 < f * x <= T})
        lam = rho * rho
        d1inv = np.linalg.inv(D_matrix(order, rho, 1))
        d2inv = np.linalg.inv(D_matrix(order, rho, 2))
        for j in (1, 2):
            sol = solve_S(order, Q, lam, grid, j)
            for d in (0, 1):
                devs = []
                for i in idx:
                    xi = grid.x[i]
                    fp = (1j * rho) ** d * np.exp(1j * rho * xi)
                    fm = (-1j * rho) ** d * np.exp(-1j * rho * xi)
                    if j == 1:
                        ta = 0.5j * fp * b022 @ d1inv
                        tb = 0.5j * fm * b012 @ d1inv
                        ref = ta - tb
                    else:
                        ta = 0.5j * fp * b021 @ d2inv
                        tb = 0.5j * fm * b011 @ d2inv
                        ref = -ta + tb
                    got = sol.values[i] if d == 0 else sol.derivs[i]
                    scale = float(matnorm(np.abs(ta) + np.abs(tb)))
                    devs.append(float(matnorm(got - ref) / scale))
                rep.add(abs(rho), f"S{j}_d{d}", float(np.mean(devs)))
    rep.fit_slopes()
    return rep
