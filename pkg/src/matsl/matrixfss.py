"""Bessel-type matrix solutions by Picard iteration on singular Volterra
equations.

With C_j(x, lambda) = diag{c_jq} and the Cauchy kernel
G(x, t, lambda) = C_2(x) C_1(t) - C_1(x) C_2(t), whose x-derivative has a
unit jump on the diagonal, the analytic-in-lambda solutions are the fixed
points of

    S_j(x)  = C_j(x) + int_0^x G(x, t) Q(t) S_j(t) dt,
    S_j*(x) = C_j(x) + int_0^x S_j*(t) Q(t) G(x, t) dt,

where S_j solves the column equation and S_j* the transposed (row) one.
Their Wronskians satisfy <S_1*, S_2> = I, <S_2*, S_1> = -I and vanish for
equal indices, which is what makes the boundary forms sigma_j well defined.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, PicardConvergenceError
from .grids import Grid
from .potential import Potential, matnorm
from .scalar import ScalarBasis, basis_for

PICARD_TOL = 1e-12
PICARD_MAXIT = 200


@dataclass(frozen=True)
class SingularOrder:
    """Diagonal singularity data for all m channels."""

    m: int
    nu: np.ndarray
    omega: np.ndarray
    mu1: np.ndarray
    mu2: np.ndarray
    beta_exp: float
    bases: tuple = field(repr=False)

    @classmethod
    def from_nu(cls, nu):
        nu = np.atleast_1d(np.asarray(nu, dtype=float))
        if np.any(np.diff(nu) > 1e-15):
            raise DomainError("nu entries must be nonincreasing")
        bases = tuple(basis_for(v) for v in nu)  # validates each entry
        return cls(m=nu.size, nu=nu, omega=nu**2 - 0.25,
                   mu1=0.5 - nu, mu2=0.5 + nu,
                   beta_exp=float(min(1.0, 2.0 * nu[0])), bases=bases)

    def mu(self, j):
        return self.mu1 if j == 1 else self.mu2


@dataclass
class FssEvaluation:
    """A solution family sampled on a grid: values and x-derivatives.

    values[i] is the m x m matrix at grid.x[i].  The origin node carries
    zeros as a sentinel; channels with mu < 0 diverge there and no consumer
    reads it.  Instances are treated as immutable once returned.
    """

    family: str
    lam: complex | None
    rho: complex | None
    grid: Grid
    values: np.ndarray
    derivs: np.ndarray
    iterations: int = 0
    final_delta: float = 0.0
    contraction: float | None = None


def wronskian(zv, zd, yv, yd):
    """<Z, Y> = Z Y' - Z' Y for stacked matrix samples."""
    return zv @ yd - zd @ yv


def diag_c(order: SingularOrder, x, lam, rho):
    """Per-channel series/Jost evaluation of c_1, c_2 on a grid.

    Returns (c1v, c1d, c2v, c2d), each of shape (n, m); the origin node
    (x = 0) is zero-filled.
    """
    x = np.asarray(x, dtype=float)
    pos = x > 0
    out = [np.zeros(x.shape + (order.m,), dtype=complex) for _ in range(4)]
    for q, basis in enumerate(order.bases):
        if rho == 0:
            v1, d1 = basis.c_lambda(1, x[pos], 0.0)
            v2, d2 = basis.c_lambda(2, x[pos], 0.0)
        else:
            v1, d1 = basis.c_auto(1, x[pos], rho)
            v2, d2 = basis.c_auto(2, x[pos], rho)
        out[0][pos, q], out[1][pos, q] = v1, d1
        out[2][pos, q], out[3][pos, q] = v2, d2
    return out


def diag_e(order: SingularOrder, x, rho):
    """Per-channel Jost evaluation of e_1, e_2 on a grid, zero at the origin."""
    if rho == 0:
        raise DomainError("Jost family is undefined at rho = 0")
    x = np.asarray(x, dtype=float)
    pos = x > 0
    out = [np.zeros(x.shape + (order.m,), dtype=complex) for _ in range(4)]
    for q, basis in enumerate(order.bases):
        v1, d1 = basis.e_scaled(1, x[pos], rho)
        v2, d2 = basis.e_scaled(2, x[pos], rho)
        out[0][pos, q], out[1][pos, q] = v1, d1
        out[2][pos, q], out[3][pos, q] = v2, d2
    return out


def _embed_diag(cols):
    """(n, m) channel columns -> (n, m, m) diagonal matrices."""
    n, m = cols.shape
    out = np.zeros((n, m, m), dtype=complex)
    idx = np.arange(m)
    out[:, idx, idx] = cols
    return out


def build_diagonal(order: SingularOrder, family: str, idx: int, grid: Grid,
                   rho) -> FssEvaluation:
    """Unperturbed diagonal solutions C_j (family 'C') or E_k (family 'E')."""
    rho = complex(rho)
    lam = rho * rho
    if family == "C":
        c1v, c1d, c2v, c2d = diag_c(order, grid.x, lam, rho)
        v, d = (c1v, c1d) if idx == 1 else (c2v, c2d)
    elif family == "E":
        e1v, e1d, e2v, e2d = diag_e(order, grid.x, rho)
        v, d = (e1v, e1d) if idx == 1 else (e2v, e2d)
    else:
        raise DomainError(f"family must be 'C' or 'E', got {family!r}")
    return FssEvaluation(family=f"{family}{idx}", lam=lam, rho=rho, grid=grid,
                         values=_embed_diag(v), derivs=_embed_diag(d))


def _relative_delta(new, old):
    d = matnorm(new - old)[1:]
    s = matnorm(new)[1:]
    return float(np.max(d / (1.0 + s)))


class _Stagnation:
    """Accept iterates parked at the roundoff floor above the tolerance.

    On ill-scaled spectral parameters (large |Im lambda|) the relative
    delta plateaus decades above the requested tolerance.  A plateau is
    only trusted as a roundoff floor when the iteration has already
    contracted by six orders of magnitude from its first step.
    """

    def __init__(self, tol):
        self.tol = tol
        self.first = None
        self.best = np.inf
        self.prev = np.inf
        self.stalled = 0

    def accept(self, delta):
        if delta <= self.tol:
            return True
        if self.first is None:
            self.first = max(delta, 1e-300)
        self.best = min(self.best, delta)
        self.stalled = self.stalled + 1 if delta > 0.5 * self.prev else 0
        self.prev = delta
        return (self.stalled >= 3 and delta <= 10 * self.best
                and self.best <= 1e-6 * self.first)


def solve_S(order: SingularOrder, Q: Potential, lam, grid: Grid, j: int,
            tol=PICARD_TOL, maxit=PICARD_MAXIT) -> FssEvaluation:
    """Bessel-type solution S_j at spectral parameter lambda."""
    lam = complex(lam)
    rho = np.sqrt(lam)
    c1v, c1d, c2v, c2d = diag_c(order, grid.x, lam, rho)
    cjv, cjd = (c1v, c1d) if j == 1 else (c2v, c2d)
    Cj = _embed_diag(cjv)
    if Q.is_zero:
        return FssEvaluation(family=f"S{j}", lam=lam, rho=rho, grid=grid,
                             values=Cj, derivs=_embed_diag(cjd))
    Qx = Q(grid.x)
    S = Cj.copy()
    it = 0
    delta = np.inf
    stag = _Stagnation(tol)
    for it in range(1, maxit + 1):
        QS = Qx @ S
        A1 = grid.cumint(c1v[:, :, None] * QS)
        A2 = grid.cumint(c2v[:, :, None] * QS)
        Snew = Cj + c2v[:, :, None] * A1 - c1v[:, :, None] * A2
        delta = _relative_delta(Snew, S)
        S = Snew
        if stag.accept(delta):
            break
    else:
        raise PicardConvergenceError(delta, maxit)
    derivs = _embed_diag(cjd) + c2d[:, :, None] * A1 - c1d[:, :, None] * A2
    return FssEvaluation(family=f"S{j}", lam=lam, rho=rho, grid=grid,
                         values=S, derivs=derivs, iterations=it,
                         final_delta=delta)


def solve_S_star(order: SingularOrder, Q: Potential, lam, grid: Grid, j: int,
                 tol=PICARD_TOL, maxit=PICARD_MAXIT) -> FssEvaluation:
    """Row solution S_j* of the transposed equation."""
    lam = complex(lam)
    rho = np.sqrt(lam)
    c1v, c1d, c2v, c2d = diag_c(order, grid.x, lam, rho)
    cjv, cjd = (c1v, c1d) if j == 1 else (c2v, c2d)
    Cj = _embed_diag(cjv)
    if Q.is_zero:
        return FssEvaluation(family=f"S{j}*", lam=lam, rho=rho, grid=grid,
                             values=Cj, derivs=_embed_diag(cjd))
    Qx = Q(grid.x)
    S = Cj.copy()
    it = 0
    delta = np.inf
    stag = _Stagnation(tol)
    for it in range(1, maxit + 1):
        SQ = S @ Qx
        A1 = grid.cumint(SQ * c1v[:, None, :])
        A2 = grid.cumint(SQ * c2v[:, None, :])
        Snew = Cj + A1 * c2v[:, None, :] - A2 * c1v[:, None, :]
        delta = _relative_delta(Snew, S)
        S = Snew
        if stag.accept(delta):
            break
    else:
        raise PicardConvergenceError(delta, maxit)
    derivs = _embed_diag(cjd) + A1 * c2d[:, None, :] - A2 * c1d[:, None, :]
    return FssEvaluation(family=f"S{j}*", lam=lam, rho=rho, grid=grid,
                         values=S, derivs=derivs, iterations=it,
                         final_delta=delta)


def volterra_residual(order: SingularOrder, Q: Potential,
                      ev: FssEvaluation) -> float:
    """Residual of the computed solution in its own integral equation."""
    if Q.is_zero:
        return 0.0
    grid = ev.grid
    lam = ev.lam
    rho = ev.rho
    c1v, _, c2v, _ = diag_c(order, grid.x, lam, rho)
    star = ev.family.endswith("*")
    j = int(ev.family[1])
    cjv = c1v if j == 1 else c2v
    Qx = Q(grid.x)
    S = ev.values
    if star:
        SQ = S @ Qx
        A1 = grid.cumint(SQ * c1v[:, None, :])
        A2 = grid.cumint(SQ * c2v[:, None, :])
        re = S - (_embed_diag(cjv) + A1 * c2v[:, None, :] - A2 * c1v[:, None, :])
    else:
        QS = Qx @ S
        A1 = grid.cumint(c1v[:, :, None] * QS)
        A2 = grid.cumint(c2v[:, :, None] * QS)
        re = S - (_embed_diag(cjv) + c2v[:, :, None] * A1 - c1v[:, :, None] * A2)
    return float(np.max(matnorm(re)[1:] / (1.0 + matnorm(S)[1:])))


def entirety_probe(order: SingularOrder, Q: Potential, grid: Grid, j: int,
                   x_fixed, center=0.0, radius=1.0, nodes=24) -> float:
    """Closed-loop integral of S_j(x_fixed, .) over a lambda circle.

    Analyticity in lambda makes the exact integral vanish; the returned
    max-abs value is the numerical residual of that statement.
    """
    i = grid.index_at(x_fixed)
    theta = 2 * np.pi * np.arange(nodes) / nodes
    acc = np.zeros((order.m, order.m), dtype=complex)
    for th in theta:
        lam = center + radius * np.exp(1j * th)
        ev = solve_S(order, Q, lam, grid, j)
        acc += ev.values[i] * np.exp(1j * th)
    integral = acc * (1j * radius * 2 * np.pi / nodes)
    return float(np.max(np.abs(integral)))
