"""Boundary value problem, characteristic function, Weyl matrix and
spectral data.

The problem L(Q, h, H) couples the singular endpoint through the linear
forms sigma_1(Y) = -<S_2*, Y>, sigma_2(Y) = <S_1*, Y> (regularized analogues
of Y(0) and Y'(0)) with a Robin condition at x = T:

    U(Y) = sigma_2(Y) - h sigma_1(Y) = 0,      V(Y) = Y'(T) + H Y(T) = 0.

Eigenvalues are zeros of Delta(lambda) = det V(phi) with phi = S_1 + S_2 h;
the Weyl matrix M = -(V(phi))^{-1} V(S_2) is meromorphic with poles there.
Large eigenvalues cluster around the lattice rho0 = (pi/T)(n + frac(mu_1q/2))
and weight matrices are recovered as contour integrals of 2 rho M(rho^2)
around those clusters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AccuracyError,
    ContourError,
    DomainError,
    LocalizationError,
    PoleProximityError,
    RegimeError,
)
from .fitting import FitReport, intercept_vs_rate, loglog_slope
from .grids import Grid, build_grid
from .matrixfss import (
    FssEvaluation,
    SingularOrder,
    _embed_diag,
    diag_c,
    solve_S,
    solve_S_star,
    wronskian,
)
from .potential import Potential, matnorm


@dataclass(frozen=True)
class SolverOptions:
    """Numerical policy knobs shared by all spectral computations."""

    n_graded: int = 700
    n_uniform_min: int = 1400
    quad_tol: float = 3e-9
    picard_tol: float = 1e-12
    newton_tol: float = 1e-11
    newton_maxit: int = 50
    safety_floor: float = 1e-6
    contour_k0: int = 16
    contour_kmax: int = 512
    contour_tol: float = 1e-9
    delta_frac: float = 0.45
    delta_cap: float = 0.2

    def scaled(self, f):
        """Loosen (f > 1) or tighten all tolerances by a common factor."""
        return SolverOptions(
            n_graded=self.n_graded, n_uniform_min=self.n_uniform_min,
            quad_tol=self.quad_tol * f, picard_tol=self.picard_tol * f,
            newton_tol=self.newton_tol * f, newton_maxit=self.newton_maxit,
            safety_floor=self.safety_floor, contour_k0=self.contour_k0,
            contour_kmax=self.contour_kmax, contour_tol=self.contour_tol * f,
            delta_frac=self.delta_frac, delta_cap=self.delta_cap)


@dataclass
class BoundaryProblem:
    """L(Q, h, H) on (0, T] with singularity data `order`."""

    order: SingularOrder
    Q: Potential
    h: np.ndarray
    H: np.ndarray
    T: float
    opts: SolverOptions = field(default_factory=SolverOptions)
    _grids: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        m = self.order.m
        self.h = np.asarray(self.h, dtype=complex)
        self.H = np.asarray(self.H, dtype=complex)
        if self.h.shape != (m, m) or self.H.shape != (m, m):
            raise DomainError("boundary matrices must be m x m")
        if self.T <= 0:
            raise DomainError("interval length T must be positive")
        if self.Q.m != m:
            raise DomainError("potential dimension does not match order")
        # certificate must exist for the Volterra machinery to apply
        self.Q.weighted_l1_certificate(float(self.order.nu[0]), self.T)

    def with_zero_data(self):
        """Companion problem L(0, 0, 0) with the same omega and T."""
        m = self.order.m
        z = np.zeros((m, m))
        return BoundaryProblem(order=self.order, Q=Potential.zero(m),
                               h=z, H=z, T=self.T, opts=self.opts)

    def grid_for(self, rho):
        """Grid sized for |rho|, cached in octave buckets."""
        absr = max(1.0, abs(rho))
        bucket = float(2.0 ** np.ceil(np.log2(absr)))
        g = self._grids.get(bucket)
        if g is None:
            g = build_grid(self.T, self.order.nu, rho=bucket,
                           quad_tol=self.opts.quad_tol,
                           n_graded=self.opts.n_graded,
                           n_uniform_min=self.opts.n_uniform_min)
            self._grids[bucket] = g
        return g


@dataclass(frozen=True)
class WeylSample:
    """Weyl matrix at a regular point with its conditioning evidence."""

    lam: complex
    M: np.ndarray
    conditioning: float


@dataclass
class SpectralDatum:
    """Roots and group weight attached to one localization contour."""

    n: int | None
    qs: tuple
    frac: float
    center: complex
    radius: float
    roots: list                      # [(rho_p, multiplicity), ...]
    count: int
    group_weight: np.ndarray | None = None
    weight_nodes: int = 0

    @property
    def rho(self):
        """Representative root (the one nearest the contour center)."""
        return min(self.roots, key=lambda rm: abs(rm[0] - self.center))[0]

    @property
    def lam(self):
        return self.rho**2

    @property
    def multiplicity(self):
        return sum(m for _, m in self.roots)


@dataclass(frozen=True)
class AsymptoticConstants:
    """Per-channel constants entering the weight-matrix asymptotics."""

    theta: np.ndarray    # theta_q per channel
    fracs: np.ndarray    # frac(mu_1q / 2) per channel
    power_sum: float     # sum of mu_2q
    classes: tuple       # ((frac, qs), ...)


# --------------------------------------------------------------------------
# boundary data at x = T

def _boundary_values(problem: BoundaryProblem, lam, grid=None):
    """(S1, S1', S2, S2') at x = T; full Picard solves unless Q = 0."""
    lam = complex(lam)
    rho = np.sqrt(lam)
    if problem.Q.is_zero:
        xT = np.array([problem.T])
        c1v, c1d, c2v, c2d = diag_c(problem.order, xT, lam, rho)
        return (np.diag(c1v[0]), np.diag(c1d[0]),
                np.diag(c2v[0]), np.diag(c2d[0]))
    if grid is None:
        grid = problem.grid_for(rho)
    s1 = solve_S(problem.order, problem.Q, lam, grid, 1,
                 tol=problem.opts.picard_tol)
    s2 = solve_S(problem.order, problem.Q, lam, grid, 2,
                 tol=problem.opts.picard_tol)
    return s1.values[-1], s1.derivs[-1], s2.values[-1], s2.derivs[-1]


def _v_forms(problem, lam, grid=None):
    """V(phi) and V(S_2) at lambda."""
    s1, s1d, s2, s2d = _boundary_values(problem, lam, grid)
    phiT = s1 + s2 @ problem.h
    phidT = s1d + s2d @ problem.h
    vphi = phidT + problem.H @ phiT
    vs2 = s2d + problem.H @ s2
    return vphi, vs2


def char_det(problem: BoundaryProblem, lam, grid=None) -> complex:
    """Characteristic function Delta(lambda) = det(phi'(T) + H phi(T))."""
    vphi, _ = _v_forms(problem, lam, grid)
    return complex(np.linalg.det(vphi))


def weyl(problem: BoundaryProblem, lam, grid=None) -> WeylSample:
    """Weyl matrix M(lambda) = -(V(phi))^{-1} V(S_2) away from poles.

    Pole proximity is detected from the smallest singular value of V(phi)
    against the natural scale of the boundary data (a bare condition
    number is blind to it for m = 1).
    """
    vphi, vs2 = _v_forms(problem, lam, grid)
    sv = np.linalg.svd(vphi, compute_uv=False)
    scale = float(sv[0] + np.max(np.abs(vs2)))
    cond = scale / max(float(sv[-1]), 1e-300)
    if not np.isfinite(cond) or cond > 1e10:
        raise PoleProximityError(complex(lam), cond)
    return WeylSample(lam=complex(lam), M=-np.linalg.solve(vphi, vs2),
                      conditioning=cond)


def phi(problem: BoundaryProblem, lam, grid=None) -> FssEvaluation:
    """phi = S_1 + S_2 h on the full grid, with derivatives."""
    lam = complex(lam)
    rho = np.sqrt(lam)
    if grid is None:
        grid = problem.grid_for(rho)
    s1 = solve_S(problem.order, problem.Q, lam, grid, 1)
    s2 = solve_S(problem.order, problem.Q, lam, grid, 2)
    return FssEvaluation(
        family="phi", lam=lam, rho=rho, grid=grid,
        values=s1.values + s2.values @ problem.h,
        derivs=s1.derivs + s2.derivs @ problem.h,
        iterations=max(s1.iterations, s2.iterations),
        final_delta=max(s1.final_delta, s2.final_delta))


def sigma_forms(problem: BoundaryProblem, ev: FssEvaluation, tol=1e-8):
    """(sigma_1(Y), sigma_2(Y)) for a solved family Y, with an
    x-independence cross-check at two interior abscissae."""
    lam = ev.lam
    grid = ev.grid
    s1s = solve_S_star(problem.order, problem.Q, lam, grid, 1)
    s2s = solve_S_star(problem.order, problem.Q, lam, grid, 2)
    idx = [grid.index_at(0.5 * grid.T), grid.index_at(0.75 * grid.T)]
    sig = []
    for i in idx:
        s1_ = wronskian(s1s.values[i], s1s.derivs[i], ev.values[i], ev.derivs[i])
        s2_ = wronskian(s2s.values[i], s2s.derivs[i], ev.values[i], ev.derivs[i])
        sig.append((-s2_, s1_))
    scale = 1.0 + max(matnorm(sig[0][0]), matnorm(sig[0][1]))
    dev = max(float(matnorm(sig[0][0] - sig[1][0])),
              float(matnorm(sig[0][1] - sig[1][1]))) / scale
    if dev > tol:
        raise AccuracyError(f"sigma forms drift with the abscissa: {dev:.3g}")
    return sig[0]


# --------------------------------------------------------------------------
# lattice of asymptotic centers

def frac_parts(order: SingularOrder):
    """Fractional parts of mu_1q / 2, in [0, 1)."""
    f = order.mu1 / 2.0
    return f - np.floor(f)


def spectral_classes(order: SingularOrder):
    """Channels grouped by equal fractional parts, sorted by frac.

    Channels in one class share localization contours asymptotically.
    """
    f = frac_parts(order)
    classes = {}
    for q, fq in enumerate(f):
        key = round(float(fq), 9)
        classes.setdefault(key, []).append(q)
    return tuple(sorted((fk, tuple(qs)) for fk, qs in classes.items()))


def rho0_center(problem: BoundaryProblem, n: int, frac: float) -> float:
    return (np.pi / problem.T) * (n + frac)


def default_radius(problem: BoundaryProblem) -> float:
    """Contour radius: within the lattice gap, capped at 0.2 pi/T."""
    fr = sorted(f for f, _ in spectral_classes(problem.order))
    gaps = [fr[i + 1] - fr[i] for i in range(len(fr) - 1)]
    gaps.append(fr[0] + 1.0 - fr[-1])
    step = np.pi / problem.T
    return min(problem.opts.delta_frac * min(gaps) * step,
               problem.opts.delta_cap * step)


def theta_constants(problem: BoundaryProblem) -> AsymptoticConstants:
    """theta_q = -beta0_11q / (i T beta0_12q) (1 - exp(-2 pi i nu_q))."""
    order = problem.order
    th = np.empty(order.m, dtype=complex)
    for q, basis in enumerate(order.bases):
        b = basis.betas.beta
        th[q] = -b[0, 0] / (1j * problem.T * b[0, 1]) * (
            1.0 - np.exp(-2j * np.pi * order.nu[q]))
        if abs(th[q]) < 1e-12:
            raise AccuracyError(f"theta vanished for channel {q}")
    return AsymptoticConstants(theta=th, fracs=frac_parts(order),
                               power_sum=float(np.sum(order.mu2)),
                               classes=spectral_classes(order))


def class_A_matrix(problem: BoundaryProblem, qs) -> np.ndarray:
    """Diagonal limit matrix supported on the class channels."""
    th = theta_constants(problem).theta
    A = np.zeros((problem.order.m, problem.order.m), dtype=complex)
    for q in qs:
        A[q, q] = th[q]
    return A


# --------------------------------------------------------------------------
# winding numbers, Newton refinement

class _CachedFun:
    """Memoized complex function with an evaluation counter."""

    def __init__(self, fun):
        self.fun = fun
        self.cache = {}

    def __call__(self, z):
        z = complex(z)
        v = self.cache.get(z)
        if v is None:
            v = self.fun(z)
            self.cache[z] = v
        return v


def _circle_winding(f, center, radius, k0, kmax, floor):
    """Winding number of f along a circle by adaptive phase tracking."""
    k = k0
    while True:
        theta = 2 * np.pi * np.arange(k) / k
        vals = np.array([f(center + radius * np.exp(1j * t)) for t in theta])
        a = np.abs(vals)
        if a.min() < floor * a.max():
            raise ContourError(
                f"contour at {center:.6g} (radius {radius:.3g}) passes too "
                f"close to a zero: |Delta| dips to {a.min():.3g}")
        steps = np.angle(np.roll(vals, -1) / vals)
        w = steps.sum() / (2 * np.pi)
        if np.max(np.abs(steps)) < 2.2 and abs(w - round(w)) < 0.05:
            return int(round(w)), vals, theta
        if k >= kmax:
            raise ContourError(
                f"winding did not stabilize at {center:.6g} with {k} nodes")
        k *= 2


def _root_centroid(center, radius, vals, theta):
    """First log-derivative moment: sum of enclosed roots, per root count."""
    z = center + radius * np.exp(1j * theta)
    dlog = (np.log(np.abs(np.roll(vals, -1))) - np.log(np.abs(vals))
            + 1j * np.angle(np.roll(vals, -1) / vals))
    zmid = center + radius * np.exp(1j * (theta + np.pi / len(theta)))
    return np.sum((zmid - center) * dlog) / (2j * np.pi)


def _newton(f, z0, tol_f, maxit=50):
    z = complex(z0)
    fz = f(z)
    for _ in range(maxit):
        if abs(fz) <= tol_f:
            return z, abs(fz)
        hstep = 1e-7 * max(1.0, abs(z))
        fp = (f(z + hstep) - f(z - hstep)) / (2 * hstep)
        if fp == 0:
            break
        dz = fz / fp
        if abs(dz) > 0.5 * max(1.0, abs(z)):
            dz *= 0.5 * max(1.0, abs(z)) / abs(dz)
        z = z - dz
        fz = f(z)
        if abs(dz) < 1e-13 * max(1.0, abs(z)):
            return z, abs(fz)
    return z, abs(fz)


def _refine_in_contour(f, center, radius, count, vals, theta, tol_f):
    """Newton refinement (with deflation) of `count` roots inside a circle."""
    s1 = _root_centroid(center, radius, vals, theta)  # sum of (root - center)
    mean_root = center + s1 / max(count, 1)
    roots = []
    if count == 1:
        starts = [mean_root]
    else:
        starts = [mean_root + 0.3 * radius * np.exp(2j * np.pi * i / count)
                  for i in range(count)]

    def deflated(z):
        v = f(z)
        for r in roots:
            v = v / (z - r)
        return v

    for s in starts:
        z, res = _newton(deflated, s, tol_f)
        if abs(z - center) <= radius * 1.1:
            roots.append(z)
    # merge near-coincident roots into multiplicities
    merged = []
    for r in sorted(roots, key=lambda z: abs(z - center)):
        for i, (r0, m0) in enumerate(merged):
            if abs(r - r0) < 1e-6 * max(1.0, abs(r0)):
                merged[i] = ((r0 * m0 + r) / (m0 + 1), m0 + 1)
                break
        else:
            merged.append((r, 1))
    if sum(m for _, m in merged) != count:
        raise LocalizationError(
            f"refined {sum(m for _, m in merged)} roots inside contour at "
            f"{center:.6g}, argument principle counted {count}")
    return merged


# --------------------------------------------------------------------------
# eigenvalue localization

def _delta_on_grid(problem, grid):
    return _CachedFun(lambda rho: char_det(problem, rho * rho, grid))


def locate_contour(problem: BoundaryProblem, n: int, frac: float, qs,
                   radius=None) -> SpectralDatum:
    """Count and refine the eigenvalue cluster around one lattice center."""
    center = rho0_center(problem, n, frac)
    base_radius = default_radius(problem) if radius is None else radius
    grid = build_grid(problem.T, problem.order.nu,
                      rho=center + base_radius,
                      quad_tol=problem.opts.quad_tol,
                      n_graded=problem.opts.n_graded,
                      n_uniform_min=problem.opts.n_uniform_min)
    f = _delta_on_grid(problem, grid)
    last_err = None
    for factor in (1.0, 1.2, 0.8, 1.44, 0.64):
        r = base_radius * factor
        try:
            count, vals, theta = _circle_winding(
                f, center, r, problem.opts.contour_k0,
                problem.opts.contour_kmax, problem.opts.safety_floor)
        except ContourError as exc:
            last_err = exc
            continue
        if count == 0:
            raise LocalizationError(
                f"no roots inside contour n={n}, frac={frac:.6g}; "
                "outside the asymptotic regime")
        scale = float(np.median(np.abs(vals)))
        roots = _refine_in_contour(f, center, r, count, vals, theta,
                                   problem.opts.newton_tol * scale)
        return SpectralDatum(n=n, qs=tuple(qs), frac=frac, center=center,
                             radius=r, roots=roots, count=count)
    raise last_err


def locate_eigenvalues(problem: BoundaryProblem, n_values,
                       classes=None) -> list:
    """Localize eigenvalue clusters for the given lattice indices.

    Returns one SpectralDatum per (n, class); channels sharing a
    fractional part are never separated, matching the grouped weights.
    """
    if classes is None:
        classes = spectral_classes(problem.order)
    out = []
    for n in n_values:
        for frac, qs in classes:
            out.append(locate_contour(problem, n, frac, qs))
    return out


def count_inside(problem: BoundaryProblem, R_lam, k0=64) -> int:
    """Number of eigenvalues (with multiplicity) in |lambda| < R_lam.

    Argument-principle count of Delta(lambda) along the lambda circle;
    the radius is nudged when the circle grazes a zero.
    """
    grid = build_grid(problem.T, problem.order.nu,
                      rho=np.sqrt(R_lam), quad_tol=problem.opts.quad_tol,
                      n_graded=problem.opts.n_graded,
                      n_uniform_min=problem.opts.n_uniform_min)
    f = _CachedFun(lambda lam: char_det(problem, lam, grid))
    last = None
    for bump in (1.0, 1.015, 0.985, 1.03):
        try:
            count, _, _ = _circle_winding(
                f, 0.0, R_lam * bump, k0, problem.opts.contour_kmax,
                problem.opts.safety_floor)
            return count
        except ContourError as exc:
            last = exc
    raise last


def locate_low(problem: BoundaryProblem, rho_max, extra_seeds=()) -> list:
    """All eigenvalues with |rho| < rho_max by disk count plus Newton.

    Newton seeds come from the lattice centers (and any extras); the disk
    winding certifies completeness and multiplicities.
    """
    R = rho_max**2
    total = count_inside(problem, R)
    grid = build_grid(problem.T, problem.order.nu, rho=rho_max,
                      quad_tol=problem.opts.quad_tol,
                      n_graded=problem.opts.n_graded,
                      n_uniform_min=problem.opts.n_uniform_min)
    f_lam = _CachedFun(lambda lam: char_det(problem, lam, grid))
    seeds = list(extra_seeds)
    for frac, _ in spectral_classes(problem.order):
        n = 0
        while True:
            c = rho0_center(problem, n, frac)
            if c > rho_max + 1.0:
                break
            if c > 1e-9:
                seeds.append(complex(c * c))
            n += 1
    seeds.append(complex(min(0.3, R / 10)))
    scale = max(abs(f_lam(complex(R))), 1e-30)
    roots = []
    for s in seeds:
        z, res = _newton(f_lam, s, problem.opts.newton_tol * scale)
        if abs(z) >= R or res > 1e-6 * scale:
            continue
        if all(abs(z - r) > 1e-6 * max(1.0, abs(r)) for r, _ in roots):
            roots.append((z, 1))
    # multiplicities by small-circle winding in lambda
    full = []
    for z, _ in roots:
        sep = min((abs(z - w) for w, _ in roots if w != z), default=np.inf)
        r_small = min(0.3 * max(abs(z), 0.3), 0.45 * sep)
        cnt, _, _ = _circle_winding(f_lam, z, r_small, 16,
                                    problem.opts.contour_kmax, 1e-9)
        full.append((z, cnt))
    found = sum(m for _, m in full)
    if found != total:
        raise LocalizationError(
            f"low-region sweep found {found} of {total} eigenvalues "
            f"inside |lambda| < {R:.6g}; add seeds")
    out = []
    for lam_p, mult in sorted(full, key=lambda t: abs(t[0])):
        rho_p = complex(np.sqrt(lam_p))
        out.append(SpectralDatum(n=None, qs=tuple(range(problem.order.m)),
                                 frac=np.nan, center=rho_p, radius=0.0,
                                 roots=[(rho_p, mult)], count=mult))
    return out


# --------------------------------------------------------------------------
# weight matrices

def _weyl_on_grid(problem, grid):
    return _CachedFun(lambda rho: weyl(problem, rho * rho, grid).M)


def group_weights(problem: BoundaryProblem, datum: SpectralDatum,
                  grid=None) -> SpectralDatum:
    """Contour integral (2 pi i)^{-1} oint 2 rho M(rho^2) d rho.

    Trapezoid nodes on the circle are doubled until the result moves by
    less than the contour tolerance; nodes nest, so values are reused.
    """
    if grid is None:
        grid = build_grid(problem.T, problem.order.nu,
                          rho=abs(datum.center) + datum.radius,
                          quad_tol=problem.opts.quad_tol,
                          n_graded=problem.opts.n_graded,
                          n_uniform_min=problem.opts.n_uniform_min)
    Mf = _weyl_on_grid(problem, grid)
    center, radius = datum.center, datum.radius
    k = max(problem.opts.contour_k0, 16)
    prev = None
    while k <= problem.opts.contour_kmax:
        theta = 2 * np.pi * np.arange(k) / k
        acc = np.zeros((problem.order.m, problem.order.m), dtype=complex)
        for t in theta:
            rho = center + radius * np.exp(1j * t)
            acc += np.exp(1j * t) * 2 * rho * Mf(rho)
        gw = acc * radius / k
        if prev is not None:
            move = float(matnorm(gw - prev))
            if move <= problem.opts.contour_tol * (1.0 + float(matnorm(gw))):
                datum.group_weight = gw
                datum.weight_nodes = k
                return datum
        prev = gw
        k *= 2
    raise ContourError(
        f"weight contour at {center:.6g} did not converge under node doubling")


def residues_per_root(problem: BoundaryProblem, datum: SpectralDatum,
                      other_poles=()) -> list:
    """Residue of M(lambda) at each refined root of one contour.

    Small circles in the lambda plane around the individual poles; the rho
    substitution is avoided here because a rho circle around a root near
    the origin would cover the lambda disk twice.  Known poles from other
    contours shrink the circle so it never grazes a neighbor.
    """
    out = []
    lam_roots = [(r * r, m) for r, m in datum.roots]
    neighbors = [complex(lp) for lp in other_poles]
    for (rho_p, mult), (lam_p, _) in zip(datum.roots, lam_roots):
        sep = min((abs(lam_p - lq) for lq, _ in lam_roots
                   if abs(lq - lam_p) > 0), default=np.inf)
        sep = min([sep] + [abs(lam_p - lq) for lq in neighbors
                           if abs(lq - lam_p) > 1e-9 * (1 + abs(lam_p))])
        r_lam = min(0.3 * abs(lam_p) + 0.1, 0.45 * sep)
        grid = build_grid(problem.T, problem.order.nu,
                          rho=np.sqrt(abs(lam_p) + r_lam),
                          quad_tol=problem.opts.quad_tol,
                          n_graded=problem.opts.n_graded,
                          n_uniform_min=problem.opts.n_uniform_min)
        Mf = _CachedFun(lambda lam: weyl(problem, lam, grid).M)
        k = 16
        prev = None
        alpha = None
        while k <= problem.opts.contour_kmax:
            theta = 2 * np.pi * np.arange(k) / k
            acc = np.zeros((problem.order.m, problem.order.m), dtype=complex)
            for t in theta:
                acc += np.exp(1j * t) * Mf(lam_p + r_lam * np.exp(1j * t))
            alpha = acc * r_lam / k
            if prev is not None and float(matnorm(alpha - prev)) <= \
                    problem.opts.contour_tol * (1.0 + float(matnorm(alpha))):
                break
            prev = alpha
            k *= 2
        else:
            raise ContourError(
                f"residue contour at lambda={lam_p:.6g} did not converge")
        out.append((rho_p, mult, alpha))
    return out


def weights_for(problem: BoundaryProblem, n_values, classes=None) -> list:
    """Locate clusters and attach group weights for the given indices."""
    data = locate_eigenvalues(problem, n_values, classes)
    for d in data:
        group_weights(problem, d)
    return data


def verify_weight_asymptotics(problem: BoundaryProblem, n_values, qs=None,
                              data=None) -> FitReport:
    """Deviation of normalized group weights from their diagonal limit.

    Normalization: (T / pi n) D_1^{-1} GW D_2 -> A_q + O(n^{-beta}).
    The report also carries an extrapolated measurement of A_q for the
    support test.
    """
    order = problem.order
    classes = spectral_classes(order)
    if qs is not None:
        classes = tuple((f, c) for f, c in classes if set(c) == set(qs))
    if data is None:
        data = weights_for(problem, n_values, classes)
    rep = FitReport(kind="weight-asymptotics", beta_exp=order.beta_exp)
    measured = {}
    for frac, qcls in classes:
        A = class_A_matrix(problem, qcls)
        devs = []
        mats = []
        ns = []
        for d in data:
            if d.qs != qcls or d.group_weight is None:
                continue
            s = np.pi * d.n / problem.T
            d1inv = np.diag(s ** (-order.mu1).astype(complex))
            d2 = np.diag(s ** (order.mu2).astype(complex))
            norm = (1.0 / s) * d1inv @ d.group_weight @ d2
            mats.append(norm)
            ns.append(d.n)
            dev = float(matnorm(norm - A))
            devs.append(dev)
            rep.add(d.n, f"class{frac:.3f}", dev)
        if ns:
            A_meas = intercept_vs_rate(np.array(ns), np.array(mats),
                                       order.beta_exp)
            measured[f"class{frac:.3f}"] = A_meas
    rep.fit_slopes()
    rep.extra["measured_A"] = {k: v.tolist() for k, v in
                               ((k, np.round(v, 12)) for k, v in measured.items())}
    rep.extra["_measured_A_arrays"] = measured
    return rep


def eigenvalue_decay_report(problem: BoundaryProblem, data) -> FitReport:
    """Fit |rho_nq - rho0_nq| against n for Theorem-style decay."""
    rep = FitReport(kind="eigenvalue-asymptotics",
                    beta_exp=problem.order.beta_exp)
    for d in data:
        if d.n is None:
            continue
        rep.add(d.n, f"class{d.frac:.3f}", abs(d.rho - d.center))
    rep.fit_slopes()
    return rep


def recover_nu(problem: BoundaryProblem, n_values, data=None) -> dict:
    """Estimate each channel's nu from diagonal group-weight growth.

    The s-th diagonal entry grows like theta_s (pi n / T)^{1 - 2 nu_s}, so a
    log-log fit of |entry| against n has slope 1 - 2 nu_s.  Raises when the
    data is not yet in the asymptotic regime.
    """
    if data is None:
        data = weights_for(problem, n_values)
    est = {}
    for frac, qcls in spectral_classes(problem.order):
        pts = [(d.n, d.group_weight) for d in data
               if d.qs == qcls and d.group_weight is not None]
        if len(pts) < 4:
            raise RegimeError("need at least 4 ladder points to recover nu")
        ns = np.array([p[0] for p in pts], dtype=float)
        for q in qcls:
            ys = np.array([abs(p[1][q, q]) for p in pts])
            if np.any(ys <= 0):
                raise RegimeError(f"channel {q}: vanishing diagonal weight")
            coef = np.polyfit(np.log(ns), np.log(ys), 1)
            resid = np.log(ys) - np.polyval(coef, np.log(ns))
            spread = np.ptp(np.log(ys))
            if spread > 1e-3 and np.std(resid) > 0.25 * spread:
                raise RegimeError(
                    f"channel {q}: weight data not in the asymptotic regime")
            est[q] = (1.0 - float(coef[0])) / 2.0
    return est


def weyl_partial_fraction(problem: BoundaryProblem, lam, data) -> tuple:
    """Partial-fraction sum over computed spectral data, with a trend report.

    Returns (partial sum at lambda, [(cutoff |lambda_p|, deviation), ...]);
    convergence behavior is reported, never asserted.
    """
    lam = complex(lam)
    m = problem.order.m
    all_poles = [r * r for d in data for r, _ in d.roots]
    terms = []
    for d in data:
        res = residues_per_root(problem, d, other_poles=all_poles)
        for rho_p, mult, alpha in res:
            lam_p = rho_p**2
            terms.append((abs(lam_p), alpha / (lam - lam_p)))
    terms.sort(key=lambda t: t[0])
    partial = np.zeros((m, m), dtype=complex)
    trend = []
    direct = weyl(problem, lam).M
    for cut, t in terms:
        partial = partial + t
        trend.append((cut, float(matnorm(partial - direct))))
    return partial, trend
