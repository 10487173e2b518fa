"""Independent verification engines.

Two routes that share nothing with the Picard solvers' quadrature: closed
forms built on scipy's Bessel/Hankel functions, and direct high-order ODE
integration of the matrix equation seeded near the singular endpoint.

The seed is the series value plus its first Volterra correction.  The pure
series misses a second-family component of size O(x0^{2 - 2 nu_1}) that
does not decay fast enough to ignore; one correction pushes the seed error
to O(x0^{4 - 2 nu_1}), negligible at the default x0.
"""

from __future__ import annotations

import numpy as np
import scipy.special as sp
from scipy.integrate import solve_ivp

from .errors import AccuracyError, DomainError
from .grids import Grid, grading_exponent
from .matrixfss import SingularOrder, _embed_diag, diag_c
from .potential import Potential

DEFAULT_RTOL = 1e-12
DEFAULT_ATOL = 1e-14


def _sqrtz_hankel(kind, nu, z):
    """sqrt(z) H_nu(z) and its z-derivative."""
    hank = sp.hankel1 if kind == 1 else sp.hankel2
    hv = hank(nu, z)
    val = np.sqrt(z) * hv
    der = hv / (2 * np.sqrt(z)) + np.sqrt(z) * (hank(nu - 1, z) - (nu / z) * hv)
    return val, der


def closed_form_reference(case, x, rho=1.0, nu=None, c10=None, c20=None):
    """Reference values of the scalar basis from scipy special functions.

    case 'nu-half': the elementary nu = 1/2 family (cosine, sine, plane
    waves).  case 'bessel': any order through J and Hankel functions.
    Returns a dict with c1, c2, e1, e2 and their x-derivatives in the
    lambda-scaled convention c_j(x, lambda) = rho^{-mu_j} c_j(rho x).
    """
    x = np.asarray(x, dtype=float)
    rho = complex(rho)
    z = rho * x.astype(complex)
    if case == "nu-half":
        c10 = 1.0 if c10 is None else c10
        c20 = 1.0 if c20 is None else c20
        return {
            "c1": c10 * np.cos(z), "c1_deriv": -c10 * rho * np.sin(z),
            "c2": c20 * np.sin(z) / rho, "c2_deriv": c20 * np.cos(z),
            "e1": np.exp(1j * z), "e1_deriv": 1j * rho * np.exp(1j * z),
            "e2": np.exp(-1j * z), "e2_deriv": -1j * rho * np.exp(-1j * z),
        }
    if case == "bessel":
        if nu is None:
            raise DomainError("case 'bessel' needs an explicit nu")
        c10 = 1.0 / np.sqrt(2 * nu) if c10 is None else c10
        c20 = 1.0 / np.sqrt(2 * nu) if c20 is None else c20
        mu1, mu2 = 0.5 - nu, 0.5 + nu
        f1 = c10 * sp.gamma(1 - nu) * 2.0 ** (-nu)
        f2 = c20 * sp.gamma(1 + nu) * 2.0**nu
        j1v = np.sqrt(z) * sp.jv(-nu, z)
        j1d = sp.jv(-nu, z) / (2 * np.sqrt(z)) + np.sqrt(z) * (
            sp.jv(-nu - 1, z) + (nu / z) * sp.jv(-nu, z))
        j2v = np.sqrt(z) * sp.jv(nu, z)
        j2d = sp.jv(nu, z) / (2 * np.sqrt(z)) + np.sqrt(z) * (
            sp.jv(nu - 1, z) - (nu / z) * sp.jv(nu, z))
        p1 = np.sqrt(np.pi / 2) * np.exp(1j * (nu * np.pi / 2 + np.pi / 4))
        p2 = np.sqrt(np.pi / 2) * np.exp(-1j * (nu * np.pi / 2 + np.pi / 4))
        h1v, h1d = _sqrtz_hankel(1, nu, z)
        h2v, h2d = _sqrtz_hankel(2, nu, z)
        return {
            "c1": rho ** (-mu1) * f1 * j1v, "c1_deriv": rho ** (1 - mu1) * f1 * j1d,
            "c2": rho ** (-mu2) * f2 * j2v, "c2_deriv": rho ** (1 - mu2) * f2 * j2d,
            "e1": p1 * h1v, "e1_deriv": rho * p1 * h1d,
            "e2": p2 * h2v, "e2_deriv": rho * p2 * h2d,
        }
    raise DomainError(f"unknown closed-form case {case!r}")


def _seed_values(order: SingularOrder, Q: Potential, lam, j, x_seed):
    """Series value at x_seed plus one Volterra correction (and derivative)."""
    rho = np.sqrt(complex(lam))
    gamma = grading_exponent(order.nu)
    mini = Grid.build(T=x_seed, gamma=gamma, x_c=0.5 * x_seed, na=160, nb=160)
    c1v, c1d, c2v, c2d = diag_c(order, mini.x, lam, rho)
    cjv = c1v if j == 1 else c2v
    cjd = c1d if j == 1 else c2d
    val = np.diag(cjv[-1]).astype(complex)
    der = np.diag(cjd[-1]).astype(complex)
    if not Q.is_zero:
        Qx = Q(mini.x)
        Cj = _embed_diag(cjv)
        QC = Qx @ Cj
        A1 = mini.cumint(c1v[:, :, None] * QC)[-1]
        A2 = mini.cumint(c2v[:, :, None] * QC)[-1]
        val = val + np.diag(c2v[-1]) @ A1 - np.diag(c1v[-1]) @ A2
        der = der + np.diag(c2d[-1]) @ A1 - np.diag(c1d[-1]) @ A2
    return val, der


def direct_integrate(order: SingularOrder, Q: Potential, lam, family,
                     x_targets, h=None, x_seed=None,
                     rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL):
    """Integrate the matrix equation from a series-corrected seed.

    family is 'S1', 'S2' or 'phi' (the latter needs the boundary matrix h).
    Returns (values, derivs) at x_targets, each of shape (len, m, m).
    """
    lam = complex(lam)
    rho = np.sqrt(lam)
    x_targets = np.asarray(x_targets, dtype=float)
    if np.any(np.diff(x_targets) <= 0) or x_targets[0] <= 0:
        raise DomainError("targets must be positive and increasing")
    if x_seed is None:
        x_seed = min(3e-4 * x_targets[-1], 0.35 / max(1.0, abs(rho)))
    if x_seed >= x_targets[0]:
        raise DomainError(
            f"seed abscissa {x_seed:.3g} must lie below the first target "
            f"{x_targets[0]:.3g}")
    m = order.m
    if family == "S1":
        v0, d0 = _seed_values(order, Q, lam, 1, x_seed)
    elif family == "S2":
        v0, d0 = _seed_values(order, Q, lam, 2, x_seed)
    elif family == "phi":
        if h is None:
            raise DomainError("family 'phi' needs the boundary matrix h")
        v1, dd1 = _seed_values(order, Q, lam, 1, x_seed)
        v2, dd2 = _seed_values(order, Q, lam, 2, x_seed)
        v0 = v1 + v2 @ h
        d0 = dd1 + dd2 @ h
    else:
        raise DomainError(f"unknown family {family!r}")

    om = order.omega

    def rhs(t, y):
        Y = y[: m * m].reshape(m, m)
        Yd = y[m * m :].reshape(m, m)
        A = (om / t**2)[:, None] * Y + (Q(t) - lam * np.eye(m)) @ Y
        return np.concatenate([Yd.ravel(), A.ravel()])

    y0 = np.concatenate([v0.ravel(), d0.ravel()])
    sol = solve_ivp(rhs, (x_seed, x_targets[-1]), y0, t_eval=x_targets,
                    method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise AccuracyError(
            f"direct integration failed from seed {x_seed:.3g}: {sol.message}")
    vals = sol.y[: m * m].T.reshape(-1, m, m)
    ders = sol.y[m * m :].T.reshape(-1, m, m)
    return vals, ders


def shooting_char(problem, lam, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL) -> complex:
    """det(V(phi)) with phi obtained by direct integration only."""
    vals, ders = direct_integrate(problem.order, problem.Q, lam, "phi",
                                  np.array([problem.T]), h=problem.h,
                                  rtol=rtol, atol=atol)
    v = ders[0] + problem.H @ vals[0]
    return complex(np.linalg.det(v))


def shooting_eigenvalue(problem, rho_guess, tol=1e-9, maxit=30) -> complex:
    """Newton refinement of an eigenvalue using the shooting determinant."""
    z = complex(rho_guess)
    scale = abs(shooting_char(problem, (z + 0.25) ** 2))
    for _ in range(maxit):
        f = shooting_char(problem, z * z)
        if abs(f) <= tol * max(scale, 1e-30):
            return z
        hstep = 1e-6 * max(1.0, abs(z))
        fp = (shooting_char(problem, (z + hstep) ** 2)
              - shooting_char(problem, (z - hstep) ** 2)) / (2 * hstep)
        dz = f / fp
        z = z - dz
        if abs(dz) < 1e-12 * max(1.0, abs(z)):
            return z
    raise AccuracyError(f"shooting Newton did not converge near {rho_guess}")
