"""Scalar building blocks: power-series solutions, Jost solutions and the
connection constants between the two bases.

For a single order nu the equation -y'' + (omega/x^2) y = lambda y with
omega = nu^2 - 1/4 has the series basis

    c_j(x, lambda) = x^{mu_j} sum_k c_{jk} (lambda x^2)^k,
    mu_1 = 1/2 - nu,  mu_2 = 1/2 + nu,

entire in lambda, and the Jost basis e_k(x, rho) = e_k(rho x) with pure
exponential behavior exp(+-i rho x) at infinity.  The two are connected by
constants beta[k, j]:  e_k = beta[k,1] rho^{mu_1} c_1 + beta[k,2] rho^{mu_2} c_2.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from .errors import AccuracyError, DomainError
from .jost import JostEngine, engine_for

X_SWITCH = 1.0          # |rho x| below which callers use the series basis
SERIES_RADIUS = 2.0     # default certified disk |rho x| <= radius for eval_c
BETA_ABSCISSAE = (1.5, 1.8)
_TAIL_TARGET = 1e-15


@dataclass(frozen=True)
class ScalarOrder:
    """Order data for one singular channel: nu and derived exponents."""

    nu: float
    omega: float
    mu1: float
    mu2: float

    @classmethod
    def from_nu(cls, nu):
        nu = float(nu)
        if nu <= 0:
            raise DomainError(f"nu must be positive, got {nu}")
        if abs(nu - round(nu)) < 1e-9 and round(nu) >= 1:
            raise DomainError(
                f"nu = {nu} is a positive integer; the logarithmic case is unsupported"
            )
        return cls(nu=nu, omega=nu * nu - 0.25, mu1=0.5 - nu, mu2=0.5 + nu)

    def mu(self, j):
        if j == 1:
            return self.mu1
        if j == 2:
            return self.mu2
        raise DomainError(f"solution index must be 1 or 2, got {j}")


def recursion_denominator(order: ScalarOrder, j: int, k):
    """Denominator of the coefficient recursion at step k.

    Equal to 4k(k -+ nu); it never vanishes for non-integer nu.
    """
    mu = order.mu(j)
    return (2 * k + mu) * (2 * k + mu - 1) - order.omega


@dataclass(frozen=True)
class SeriesSolution:
    """Truncated power-series solution with a certified evaluation disk."""

    order: ScalarOrder
    j: int
    c0: complex
    coeffs: np.ndarray
    K: int
    radius: float
    tail_bound: float

    def recursion_residual(self):
        """max_k |coeffs[k] d_k + coeffs[k-1]| / |coeffs[k-1]|, d_k the denominator."""
        k = np.arange(1, self.K + 1)
        d = recursion_denominator(self.order, self.j, k)
        num = np.abs(self.coeffs[1:] * d + self.coeffs[:-1])
        return float(np.max(num / np.abs(self.coeffs[:-1])))


def series_coeffs(order: ScalarOrder, j: int, c0: complex, K: int | None = None,
                  radius: float = SERIES_RADIUS) -> SeriesSolution:
    """Coefficients of the series solution c_j, truncated for a given disk.

    If K is None the truncation is grown adaptively until the geometric
    majorant of the tail on |rho x| <= radius drops below 1e-15.
    """
    if c0 == 0:
        raise DomainError("leading coefficient c0 must be nonzero")
    adaptive = K is None
    kcap = 400 if adaptive else int(K)
    if not adaptive and kcap < 1:
        raise DomainError(f"K must be >= 1, got {K}")
    coeffs = [complex(c0)]
    r2 = radius * radius
    term = abs(c0) * 1.0
    max_term = term
    tail = np.inf
    k = 0
    while k < kcap:
        k += 1
        d = recursion_denominator(order, j, k)
        coeffs.append(-coeffs[-1] / d)
        prev, term = term, abs(coeffs[-1]) * r2**k
        max_term = max(max_term, term)
        ratio = min(term / prev, 0.5) if prev > 0 else 0.0
        tail = term * ratio / (1 - ratio)
        if adaptive and k >= 4 and tail < _TAIL_TARGET * max(1.0, max_term):
            break
    return SeriesSolution(order=order, j=j, c0=complex(c0),
                          coeffs=np.asarray(coeffs, dtype=complex),
                          K=k, radius=radius, tail_bound=float(tail))


def _series_eval(sol: SeriesSolution, x, lam, derivative=0):
    """Evaluate x^{mu} P(lambda x^2) and derivatives by Horner on the grid."""
    mu = sol.order.mu(sol.j)
    x = np.asarray(x, dtype=float)
    w = lam * (x.astype(complex) ** 2)
    k = np.arange(sol.K + 1)
    if derivative == 0:
        co = sol.coeffs
        pref = x**mu
    elif derivative == 1:
        co = (2 * k + mu) * sol.coeffs
        pref = x ** (mu - 1)
    elif derivative == 2:
        co = (2 * k + mu) * (2 * k + mu - 1) * sol.coeffs
        pref = x ** (mu - 2)
    else:
        raise DomainError("only derivatives 0, 1, 2 are available")
    acc = np.zeros_like(w)
    for c in co[::-1]:
        acc = acc * w + c
    return pref * acc


def eval_c(sol: SeriesSolution, x, rho):
    """Value and x-derivative of c_j(x, lambda), lambda = rho^2.

    Valid inside the certified disk |rho x| <= radius with Re rho >= 0; rho
    powers elsewhere in the library use the principal branch, which on
    x > 0 makes this identical to rho^{-mu_j} c_j(rho x).
    """
    rho = complex(rho)
    if rho.real < -1e-12 * abs(rho):
        raise DomainError(f"need Re rho >= 0, got rho = {rho}")
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("abscissa must be positive")
    if np.any(np.abs(rho) * x > sol.radius * (1 + 1e-12)):
        raise DomainError(
            f"|rho x| exceeds the certified disk radius {sol.radius}; "
            "use the Jost/Birkhoff representation instead"
        )
    lam = rho * rho
    return _series_eval(sol, x, lam, 0), _series_eval(sol, x, lam, 1)


def ode_residual(sol: SeriesSolution, x, rho):
    """|-c'' + (omega/x^2) c - rho^2 c| at the given abscissae."""
    lam = complex(rho) ** 2
    v = _series_eval(sol, x, lam, 0)
    d2 = _series_eval(sol, x, lam, 2)
    x = np.asarray(x, dtype=float)
    return np.abs(-d2 + (sol.order.omega / x**2) * v - lam * v)


@dataclass(frozen=True)
class JostSolution:
    """Jost solution sampled on a grid, with its measured tail constant."""

    order: ScalarOrder
    k: int
    grid: np.ndarray
    values: np.ndarray
    derivatives: np.ndarray
    tail_cutoff: float
    measured_m0: float


def eval_jost(order: ScalarOrder, k: int, x, rho):
    """Value and x-derivative of e_k(x, rho) = e_k(rho x).

    Requires |rho x| >= X_SWITCH; below the switch the caller goes through
    the series basis and the connection constants.
    """
    rho = complex(rho)
    x = np.asarray(x, dtype=float)
    z = rho * x.astype(complex)
    if np.any(np.abs(z) < X_SWITCH * (1 - 1e-12)):
        raise DomainError(
            f"|rho x| must be >= {X_SWITCH} for Jost evaluation; "
            "use the series basis below the switch"
        )
    eng = engine_for(order.nu)
    v, d = eng.e_pair(z, k)
    return v, rho * d


def jost_solution(order: ScalarOrder, k: int, grid, rho) -> JostSolution:
    """Sample e_k on a grid and measure the constant in its tail estimate.

    The measured M0 is sup over the grid of |rho x| times the deviation of
    the exponentially normalized value (and first derivative) from 1.
    """
    rho = complex(rho)
    grid = np.asarray(grid, dtype=float)
    vals, ders = eval_jost(order, k, grid, rho)
    z = rho * grid
    sgn = 1j if k == 1 else -1j
    norm_v = vals * np.exp(-sgn * z)
    norm_d = ders / (sgn * rho) * np.exp(-sgn * z)
    m0 = np.max(np.abs(z) * np.maximum(np.abs(norm_v - 1), np.abs(norm_d - 1)))
    eng = engine_for(order.nu)
    return JostSolution(order=order, k=k, grid=grid, values=vals,
                        derivatives=ders, tail_cutoff=eng.x_asym,
                        measured_m0=float(m0))


@dataclass(frozen=True)
class BetaConstants:
    """Connection constants beta[k, j] between the Jost and series bases."""

    order: ScalarOrder
    beta: np.ndarray
    abscissae: tuple
    spread: float

    @property
    def det(self):
        return complex(np.linalg.det(self.beta))


def beta_constants(order: ScalarOrder, c10: complex, c20: complex) -> BetaConstants:
    """Extract beta[k, j] by Wronskians against the series basis.

    Requires the pair normalization c10 c20 = 1/(2 nu), which makes the
    series Wronskian equal to one so that
    beta[k,1] = <e_k, c_2> and beta[k,2] = -<e_k, c_1>.
    """
    target = 1.0 / (2 * order.nu)
    if abs(c10 * c20 - target) > 1e-12 * abs(target):
        raise DomainError(
            f"pair normalization violated: c10*c20 = {c10 * c20}, need {target}"
        )
    s1 = series_coeffs(order, 1, c10)
    s2 = series_coeffs(order, 2, c20)
    eng = engine_for(order.nu)

    def extract(z):
        c1v, c1d = eval_c(s1, z, 1.0)
        c2v, c2d = eval_c(s2, z, 1.0)
        out = np.empty((2, 2), dtype=complex)
        for k in (1, 2):
            ev, ed = eng.e_pair(np.array([z + 0j]), k)
            out[k - 1, 0] = ev[0] * c2d[()] - ed[0] * c2v[()]
            out[k - 1, 1] = -(ev[0] * c1d[()] - ed[0] * c1v[()])
        return out

    b1 = extract(BETA_ABSCISSAE[0])
    b2 = extract(BETA_ABSCISSAE[1])
    spread = float(np.max(np.abs(b1 - b2)))
    if spread > 1e-9:
        raise AccuracyError(
            f"beta extraction inconsistent between matching abscissae: {spread:.3g}"
        )
    return BetaConstants(order=order, beta=b1, abscissae=BETA_ABSCISSAE,
                         spread=spread)


@dataclass
class ScalarBasis:
    """One channel's full evaluation kit: series pair, Jost engine, betas.

    The default leading coefficients c10 = c20 = (2 nu)^{-1/2} give the
    unit-Wronskian normalization used throughout the matrix layer.
    """

    order: ScalarOrder
    c10: complex
    c20: complex
    s1: SeriesSolution = field(repr=False)
    s2: SeriesSolution = field(repr=False)
    engine: JostEngine = field(repr=False)
    betas: BetaConstants = field(repr=False)

    @classmethod
    def build(cls, nu, c10=None, c20=None):
        order = ScalarOrder.from_nu(nu)
        if c10 is None and c20 is None:
            c10 = c20 = 1.0 / np.sqrt(2 * order.nu)
        s1 = series_coeffs(order, 1, c10)
        s2 = series_coeffs(order, 2, c20)
        return cls(order=order, c10=complex(c10), c20=complex(c20),
                   s1=s1, s2=s2, engine=engine_for(order.nu),
                   betas=beta_constants(order, c10, c20))

    def series(self, j):
        return self.s1 if j == 1 else self.s2

    def c_lambda(self, j, x, lam):
        """Series evaluation of c_j(x, lambda) without the disk guard.

        Used by the matrix layer after it has itself partitioned the grid
        into series and Jost regimes.
        """
        sol = self.series(j)
        return _series_eval(sol, x, lam, 0), _series_eval(sol, x, lam, 1)

    def c_via_jost(self, j, x, rho):
        """c_j(x, lambda) through the Jost pair, for |rho x| beyond the disk."""
        rho = complex(rho)
        x = np.asarray(x, dtype=float)
        z = rho * x.astype(complex)
        e1v, e1d = self.engine.e_pair(z, 1)
        e2v, e2d = self.engine.e_pair(z, 2)
        b = self.betas.beta
        if j == 1:
            pref = 0.5j * rho ** (self.order.mu2 - 1)
            v = pref * (b[1, 1] * e1v - b[0, 1] * e2v)
            d = pref * rho * (b[1, 1] * e1d - b[0, 1] * e2d)
        else:
            pref = 0.5j * rho ** (self.order.mu1 - 1)
            v = pref * (b[0, 0] * e2v - b[1, 0] * e1v)
            d = pref * rho * (b[0, 0] * e2d - b[1, 0] * e1d)
        return v, d

    def c_auto(self, j, x, rho):
        """c_j(x, lambda) with per-point switching at |rho x| = series radius."""
        rho = complex(rho)
        x = np.asarray(x, dtype=float)
        lam = rho * rho
        z = np.abs(rho) * x
        small = z <= self.series(j).radius
        v = np.empty(x.shape, dtype=complex)
        d = np.empty(x.shape, dtype=complex)
        if small.any():
            v[small], d[small] = self.c_lambda(j, x[small], lam)
        big = ~small
        if big.any():
            v[big], d[big] = self.c_via_jost(j, x[big], rho)
        return v, d

    def e_scaled(self, k, x, rho):
        """e_k(x, rho) = e_k(rho x) and its x-derivative, any |rho x|.

        Below the Jost switch the value comes from the series basis through
        the connection constants.
        """
        rho = complex(rho)
        x = np.asarray(x, dtype=float)
        z = np.abs(rho) * x
        big = z >= X_SWITCH
        v = np.empty(x.shape, dtype=complex)
        d = np.empty(x.shape, dtype=complex)
        if big.any():
            zb = rho * x[big].astype(complex)
            ev, ed = self.engine.e_pair(zb, k)
            v[big], d[big] = ev, rho * ed
        small = ~big
        if small.any():
            lam = rho * rho
            b = self.betas.beta
            c1v, c1d = self.c_lambda(1, x[small], lam)
            c2v, c2d = self.c_lambda(2, x[small], lam)
            f1 = b[k - 1, 0] * rho ** self.order.mu1
            f2 = b[k - 1, 1] * rho ** self.order.mu2
            v[small] = f1 * c1v + f2 * c2v
            d[small] = f1 * c1d + f2 * c2d
        return v, d


_BASIS_CACHE: dict[float, ScalarBasis] = {}
_BASIS_LOCK = threading.Lock()


def basis_for(nu) -> ScalarBasis:
    """Shared default-normalization basis for one order."""
    key = float(nu)
    with _BASIS_LOCK:
        b = _BASIS_CACHE.get(key)
    if b is not None:
        return b
    b = ScalarBasis.build(key)
    with _BASIS_LOCK:
        return _BASIS_CACHE.setdefault(key, b)
