"""Birkhoff-type solutions for large |rho| by contractive successive
approximations.

Y_2 solves a plain Volterra equation driven by E_2; Y_1 solves the
full-interval equation

    Y_1(x) = E_1(x) + (2 i rho)^{-1} [ int_0^x E_1(x) E_2(t) Q Y_1 dt
                                     + int_x^T E_2(x) E_1(t) Q Y_1 dt ].

Both are iterated in the normalized variable u = Y / w with
w(x) = (rho x)^{mu_11} for |rho x| < 1 and exp(+-i rho x) beyond, which
keeps every iterate O(1).  A solve is accepted only when the measured
L1 kernel bound is below 1/2, the regime in which the iteration provably
contracts at rate O(|rho|^{-beta}), beta = min(1, 2 nu_1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractionError, DomainError, PicardConvergenceError
from .grids import Grid
from .matrixfss import FssEvaluation, SingularOrder, _embed_diag, diag_e
from .potential import Potential, matnorm

Y_TOL = 1e-12
Y_MAXIT = 200


@dataclass
class BirkhoffSolve:
    """An accepted Birkhoff solve with its contraction evidence."""

    rho: complex
    k: int
    sector: str
    Y: FssEvaluation
    contraction: float
    deltas: list = field(default_factory=list)


def _sector_tag(rho):
    a = np.angle(rho)
    if a > 1e-14:
        return "upper"
    if a < -1e-14:
        return "lower"
    return "boundary"


def _normalizer(order, x, rho, k):
    """w(x): power of (rho x) inside the unit disk, pure exponential outside."""
    z = rho * x.astype(complex)
    w = np.ones_like(z)
    inner = (np.abs(z) < 1.0) & (x > 0)
    outer = (np.abs(z) >= 1.0)
    w[inner] = z[inner] ** order.mu1[0]
    sk = 1j if k == 1 else -1j
    w[outer] = np.exp(sk * z[outer])
    return w


def kernel_bound(order: SingularOrder, Q: Potential, grid: Grid, rho,
                 k: int, e_data=None) -> float:
    """Upper bound for sup_x int_0^T ||K_k(x, t, rho)|| dt.

    Uses the triangle inequality across channels, so it slightly
    overestimates; acceptance at < 1/2 is therefore conservative.
    """
    rho = complex(rho)
    if Q.is_zero:
        return 0.0
    x = grid.x
    e1v, _, e2v, _ = e_data if e_data is not None else diag_e(order, x, rho)
    w = np.abs(_normalizer(order, x, rho, k))
    w[0] = 1.0
    qrow = np.max(np.abs(Q(x)), axis=2)
    g1 = np.abs(e1v) * qrow * w[:, None]
    g2 = np.abs(e2v) * qrow * w[:, None]
    J1 = np.real(grid.cumint(g1.astype(complex)))
    J2 = np.real(grid.cumint(g2.astype(complex)))
    if k == 1:
        per_q = np.abs(e1v) * J2 + np.abs(e2v) * (J1[-1][None, :] - J1)
    else:
        per_q = np.abs(e1v) * J2 + np.abs(e2v) * J1
    tot = per_q.sum(axis=1) / (2.0 * abs(rho) * w)
    return float(np.max(tot[1:]))


def solve_Y(order: SingularOrder, Q: Potential, grid: Grid, k: int, rho,
            tol=Y_TOL, maxit=Y_MAXIT) -> BirkhoffSolve:
    """Birkhoff-type solution Y_k at rho, Re rho >= 0.

    Raises ContractionError when the measured kernel bound is >= 1/2 so the
    caller can raise its rho cutoff.
    """
    rho = complex(rho)
    if rho.real < -1e-12 * abs(rho) or rho == 0:
        raise DomainError(f"need Re rho >= 0 and rho != 0, got {rho}")
    if k not in (1, 2):
        raise DomainError(f"Birkhoff index must be 1 or 2, got {k}")
    lam = rho * rho
    x = grid.x
    e1v, e1d, e2v, e2d = diag_e(order, x, rho)
    ekv, ekd = (e1v, e1d) if k == 1 else (e2v, e2d)
    Ek = _embed_diag(ekv)
    sector = _sector_tag(rho)
    if Q.is_zero:
        Y = FssEvaluation(family=f"Y{k}", lam=lam, rho=rho, grid=grid,
                          values=Ek, derivs=_embed_diag(ekd), contraction=0.0)
        return BirkhoffSolve(rho=rho, k=k, sector=sector, Y=Y,
                             contraction=0.0, deltas=[])

    bound = kernel_bound(order, Q, grid, rho, k, e_data=(e1v, e1d, e2v, e2d))
    if bound >= 0.5:
        raise ContractionError(rho, bound)

    Qx = Q(x)
    w = _normalizer(order, x, rho, k)
    w[0] = 1.0
    pref = 1.0 / (2j * rho)
    Y = Ek.copy()
    U = Y / w[:, None, None]
    deltas = []
    I1 = I2 = None
    from .matrixfss import _Stagnation
    stag = _Stagnation(tol)
    for _ in range(maxit):
        W1 = e1v[:, :, None] * (Qx @ Y)
        W2 = e2v[:, :, None] * (Qx @ Y)
        W1[0] = 0.0
        W2[0] = 0.0
        I1 = grid.cumint(W1)
        I2 = grid.cumint(W2)
        if k == 1:
            Ynew = Ek + pref * (e1v[:, :, None] * I2
                                + e2v[:, :, None] * (I1[-1][None] - I1))
        else:
            Ynew = Ek + pref * (e1v[:, :, None] * I2 - e2v[:, :, None] * I1)
        Unew = Ynew / w[:, None, None]
        deltas.append(float(np.max(matnorm(Unew - U)[1:])))
        Y, U = Ynew, Unew
        if stag.accept(deltas[-1]):
            break
    else:
        raise PicardConvergenceError(deltas[-1], maxit)

    if k == 1:
        derivs = _embed_diag(ekd) + pref * (
            e1d[:, :, None] * I2 + e2d[:, :, None] * (I1[-1][None] - I1))
    else:
        derivs = _embed_diag(ekd) + pref * (
            e1d[:, :, None] * I2 - e2d[:, :, None] * I1)
    ev = FssEvaluation(family=f"Y{k}", lam=lam, rho=rho, grid=grid,
                       values=Y, derivs=derivs, iterations=len(deltas),
                       final_delta=deltas[-1], contraction=bound)
    return BirkhoffSolve(rho=rho, k=k, sector=sector, Y=ev,
                         contraction=bound, deltas=deltas)


def successive_approximation_report(order, Q, grid, k, rho):
    """Per-iteration sup-norm deltas together with the kernel bound.

    In the accepted regime the delta ratios stay below the measured bound.
    """
    solve = solve_Y(order, Q, grid, k, rho)
    d = solve.deltas
    ratios = [d[i + 1] / d[i] for i in range(len(d) - 1) if d[i] > 0]
    return {
        "rho": solve.rho,
        "k": k,
        "contraction_bound": solve.contraction,
        "deltas": d,
        "ratios": ratios,
    }
