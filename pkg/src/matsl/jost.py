"""Normalized Jost function engine for the scalar singular equation.

For -u'' + (omega/z^2) u = u with omega = nu^2 - 1/4, the Jost solution
e1(z) behaves like exp(iz) for large |z|.  Everything here works with the
normalized function

    uhat(z) = e1(z) exp(-iz),   uhat -> 1 as |z| -> oo,

which satisfies uhat'' + 2i uhat' = (omega/z^2) uhat.  The second Jost
solution follows from the real-coefficient reflection e2(z) = conj(e1(conj z)).

Evaluation strategy by region of the closed right half z-plane:

* |z| >= X_asym: divergent asymptotic (Hankel-type) expansion truncated at
  its minimal term; X_asym is chosen so the minimal term is below 5e-15.
* |z| < X_asym, z real: dense interpolant of a high-accuracy inward ODE
  integration seeded by the expansion at X_asym.
* off-axis, arg z < 0 or Im z small: Taylor continuation ("rotation") of
  the ODE from the real-axis profile at |z|; continuation downward is
  well-conditioned because the parasitic solution exp(-2iz) decays in
  that direction.
* arg z > 0 with Im z large: inward integration along the ray of z, where
  the parasitic solution decays inward.
"""

from __future__ import annotations

import threading

import numpy as np
from scipy.integrate import solve_ivp

from .errors import AccuracyError, DomainError

# evaluation is only supported down to this modulus; below it callers must
# switch to the power-series basis through the connection constants
Z_MIN = 0.88

_ASYM_MINTERM = 5e-15
_HOP_MAX = 0.42          # radians per Taylor continuation hop
_ROTATE_UP_IM_MAX = 4.0  # conditioning cap exp(2*Im z) ~ 3e3 for upward hops


def asym_coeffs(nu, kmax=80):
    """Coefficients a_k of the large-z expansion uhat ~ sum a_k (i/z)^k."""
    a = np.empty(kmax + 1)
    a[0] = 1.0
    for k in range(1, kmax + 1):
        a[k] = a[k - 1] * (4.0 * nu**2 - (2.0 * k - 1.0) ** 2) / (8.0 * k)
    return a


def _asym_eval(a, z):
    """Evaluate the expansion at its optimal truncation.

    Returns (uhat, uhat', minimal term size).  z may be any complex array
    with |z| large enough that the minimal term is negligible.  For
    half-integer nu the coefficients terminate and the expansion is exact.
    """
    z = np.asarray(z, dtype=complex)
    u = np.ones_like(z)
    up = np.zeros_like(z)
    izk = np.ones_like(z)
    active = np.ones(z.shape, dtype=bool)
    last = np.full(z.shape, np.inf)
    minterm = np.zeros(z.shape)
    for k in range(1, len(a)):
        if a[k] == 0.0:
            # terminating (half-integer order) expansion: exact from here on
            minterm[active] = 0.0
            active[:] = False
            break
        izk = izk * (1j / z)
        term = a[k] * izk
        mag = np.abs(term)
        # freeze components whose terms started growing
        grew = mag >= last
        newly = active & grew
        minterm[newly] = last[newly]
        active &= ~grew
        if not active.any():
            break
        u = np.where(active, u + term, u)
        up = np.where(active, up - k * term / z, up)
        last = np.where(active, mag, last)
    minterm[active] = last[active]
    return u, up, minterm


def _profile_rhs(t, y, omega):
    return [y[1], (omega / t**2) * y[0] - 2j * y[1]]


class JostEngine:
    """Per-order evaluator of the normalized Jost pair (uhat, uhat')."""

    def __init__(self, nu):
        if nu <= 0:
            raise DomainError(f"nu must be positive, got {nu}")
        self.nu = float(nu)
        self.omega = nu**2 - 0.25
        self.a = asym_coeffs(nu)
        self.x_asym = self._pick_x_asym()
        self._dense = self._build_profile()

    def _pick_x_asym(self):
        x = 18.0
        for _ in range(40):
            _, _, mt = _asym_eval(self.a, np.array([x]))
            if mt[0] <= _ASYM_MINTERM:
                return x
            x *= 1.25
        raise AccuracyError(f"asymptotic expansion unusable for nu={self.nu}")

    def _build_profile(self):
        u0, up0, _ = _asym_eval(self.a, np.array([self.x_asym + 0j]))
        sol = solve_ivp(
            _profile_rhs,
            (self.x_asym, Z_MIN),
            [u0[0], up0[0]],
            args=(self.omega,),
            method="DOP853",
            rtol=1e-13,
            atol=1e-15,
            dense_output=True,
        )
        if not sol.success:
            raise AccuracyError(f"profile integration failed for nu={self.nu}")
        return sol.sol

    # -- real axis -------------------------------------------------------

    def _real_pair(self, r):
        """(uhat, uhat') at real r in [Z_MIN, oo)."""
        r = np.asarray(r, dtype=float)
        u = np.empty(r.shape, dtype=complex)
        up = np.empty(r.shape, dtype=complex)
        far = r >= self.x_asym
        if far.any():
            u[far], up[far], _ = _asym_eval(self.a, r[far].astype(complex))
        near = ~far
        if near.any():
            vals = self._dense(r[near])
            u[near] = vals[0]
            up[near] = vals[1]
        return u, up

    # -- Taylor continuation ----------------------------------------------

    def _taylor_step(self, u0, u1, a, delta, kmax=68):
        """Advance (u, u') of u'' = (omega/z^2 - 1) u from points a by delta."""
        om = self.omega
        U_prev, U_cur = np.asarray(u0, complex), np.asarray(u1, complex)
        U = [U_prev, U_cur]
        P = []
        val = U[0] + U[1] * delta
        der = U[1].copy()
        dpow = delta.copy()
        inv_a = 1.0 / a
        pref = inv_a * inv_a
        scale = np.maximum(np.abs(U[0]), np.abs(U[1] * delta)) + 1e-300
        for k in range(kmax):
            P.append((k + 1) * pref)
            pref = -pref * inv_a
            conv = P[0] * U[k]
            for l in range(1, k + 1):
                conv = conv + P[l] * U[k - l]
            Unew = (om * conv - U[k]) / ((k + 1) * (k + 2))
            U.append(Unew)
            der = der + (k + 2) * Unew * dpow
            dpow = dpow * delta
            contrib = Unew * dpow
            val = val + contrib
            if k >= 8 and k % 4 == 0:
                if np.max(np.abs(contrib) / scale) < 1e-17:
                    break
        return val, der

    def _rotate(self, z):
        """Continue e1, e1' from the real axis to z = |z| e^{i theta}."""
        r = np.abs(z)
        theta = np.angle(z)
        uh, uhp = self._real_pair(r)
        base = r.astype(complex)
        # unnormalized pair on the real axis
        u = uh * np.exp(1j * r)
        upr = (uhp + 1j * uh) * np.exp(1j * r)
        nh = max(1, int(np.ceil(np.max(np.abs(theta)) / _HOP_MAX)))
        for h in range(1, nh + 1):
            tgt = r * np.exp(1j * theta * (h / nh))
            u, upr = self._taylor_step(u, upr, base, tgt - base)
            base = tgt
        phase = np.exp(-1j * base)
        uhat = u * phase
        uhatp = upr * phase - 1j * uhat
        return uhat, uhatp

    # -- inward ray integration (deep upper sector) ------------------------

    def _ray_march(self, z):
        """(uhat, uhat') along a common ray arg z = theta in (0, pi/2]."""
        theta = np.angle(z[0])
        if not np.allclose(np.angle(z), theta, atol=1e-9):
            raise DomainError("ray march requires co-linear points")
        r = np.abs(z)
        order = np.argsort(r)[::-1]
        r_desc = r[order]
        x0 = max(self.x_asym, r_desc[0] * (1 + 1e-12))
        eiθ = np.exp(1j * theta)
        seed = np.array([x0 * eiθ])
        u0, up0, _ = _asym_eval(self.a, seed)

        def rhs(t, y):
            return [y[1], (self.omega / t**2) * y[0] - 2j * eiθ * y[1]]

        sol = solve_ivp(
            rhs,
            (x0, r_desc[-1]),
            [u0[0], up0[0] * eiθ],
            t_eval=r_desc,
            method="DOP853",
            rtol=1e-13,
            atol=1e-15,
        )
        if not sol.success:
            raise AccuracyError(f"ray integration failed at theta={theta:.3f}")
        uh = np.empty_like(z)
        uhp = np.empty_like(z)
        uh[order] = sol.y[0]
        uhp[order] = sol.y[1] / eiθ
        return uh, uhp

    # -- dispatcher --------------------------------------------------------

    def u1hat(self, z):
        """(uhat1, uhat1') for z in the closed right half-plane, |z| >= Z_MIN."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        r = np.abs(z)
        if np.any(r < Z_MIN * (1 - 1e-12)):
            raise DomainError(
                f"Jost evaluation needs |z| >= {Z_MIN}; "
                f"got min |z| = {r.min():.4g} (use the series basis below the switch)"
            )
        if np.any(np.real(z) < -1e-9 * r):
            raise DomainError("Jost evaluation restricted to Re z >= 0")
        u = np.empty_like(z)
        up = np.empty_like(z)
        far = r >= self.x_asym
        if far.any():
            u[far], up[far], _ = _asym_eval(self.a, z[far])
        near = ~far
        if near.any():
            zn = z[near]
            un = np.empty_like(zn)
            upn = np.empty_like(zn)
            realish = np.abs(zn.imag) <= 1e-14 * np.abs(zn.real)
            if realish.any():
                un[realish], upn[realish] = self._real_pair(zn[realish].real)
            rot = ~realish & ((zn.imag < 0) | (zn.imag <= _ROTATE_UP_IM_MAX))
            if rot.any():
                un[rot], upn[rot] = self._rotate(zn[rot])
            deep = ~realish & ~rot
            if deep.any():
                zd = zn[deep]
                ud = np.empty_like(zd)
                upd = np.empty_like(zd)
                # bucket by ray; callers nearly always pass co-linear points
                angles = np.angle(zd)
                for th in np.unique(np.round(angles, 12)):
                    msk = np.abs(angles - th) < 1e-9
                    ud[msk], upd[msk] = self._ray_march(zd[msk])
                un[deep], upn[deep] = ud, upd
            u[near], up[near] = un, upn
        return u, up

    def e_pair(self, z, k):
        """Jost solution e_k(z) and derivative e_k'(z).

        k = 1 carries exp(iz) asymptotics, k = 2 carries exp(-iz); the second
        is obtained from the first by the real-coefficient reflection.
        """
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if k == 1:
            uh, uhp = self.u1hat(z)
            ph = np.exp(1j * z)
            return uh * ph, (uhp + 1j * uh) * ph
        if k == 2:
            uh, uhp = self.u1hat(np.conj(z))
            ph = np.exp(-1j * z)
            return np.conj(uh) * ph, (np.conj(uhp) - 1j * np.conj(uh)) * ph
        raise DomainError(f"Jost index must be 1 or 2, got {k}")


_CACHE: dict[float, JostEngine] = {}
_CACHE_LOCK = threading.Lock()


def engine_for(nu) -> JostEngine:
    """Shared per-order engine; profile construction is done once per nu."""
    key = float(nu)
    with _CACHE_LOCK:
        eng = _CACHE.get(key)
    if eng is not None:
        return eng
    eng = JostEngine(key)
    with _CACHE_LOCK:
        return _CACHE.setdefault(key, eng)
