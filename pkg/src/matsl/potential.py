"""Matrix potential Q(x) with its weighted integrability certificate."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import DomainError
from .grids import cumquad4, grading_exponent


def matnorm(A):
    """Entrywise max-abs norm, applied along the last two axes."""
    return np.max(np.abs(A), axis=(-2, -1))


@dataclass(frozen=True)
class Potential:
    """Q(x) given as zero, a matrix polynomial, or interpolated node values.

    Node data is interpolated entrywise by monotone cubics (separately in
    real and imaginary parts), which keeps spurious overshoots out of the
    weighted-integrability certificate.
    """

    m: int
    kind: str
    coeffs: tuple = ()
    node_x: np.ndarray | None = field(default=None, repr=False)
    node_vals: np.ndarray | None = field(default=None, repr=False)
    _interp: tuple = field(default=(), repr=False, compare=False)

    @classmethod
    def zero(cls, m):
        return cls(m=m, kind="zero")

    @classmethod
    def polynomial(cls, coeffs):
        """Q(x) = sum_p coeffs[p] x^p with m x m matrix coefficients."""
        co = tuple(np.asarray(c, dtype=complex) for c in coeffs)
        if not co:
            raise DomainError("polynomial potential needs at least one coefficient")
        m = co[0].shape[0]
        for c in co:
            if c.shape != (m, m):
                raise DomainError("all polynomial coefficients must be m x m")
        return cls(m=m, kind="polynomial", coeffs=co)

    @classmethod
    def from_nodes(cls, x_nodes, values):
        x_nodes = np.asarray(x_nodes, dtype=float)
        values = np.asarray(values, dtype=complex)
        if x_nodes.ndim != 1 or values.shape[0] != x_nodes.size:
            raise DomainError("node potential needs matching x and value arrays")
        if np.any(np.diff(x_nodes) <= 0):
            raise DomainError("node abscissae must be strictly increasing")
        m = values.shape[1]
        interp = (
            PchipInterpolator(x_nodes, values.real, axis=0, extrapolate=True),
            PchipInterpolator(x_nodes, values.imag, axis=0, extrapolate=True),
        )
        return cls(m=m, kind="nodes", node_x=x_nodes, node_vals=values,
                   _interp=interp)

    @property
    def is_zero(self):
        return self.kind == "zero"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out_shape = x.shape + (self.m, self.m)
        if self.kind == "zero":
            return np.zeros(out_shape, dtype=complex)
        if self.kind == "polynomial":
            out = np.zeros(out_shape, dtype=complex)
            xp = np.ones_like(x, dtype=complex)
            for c in self.coeffs:
                out += xp[..., None, None] * c
                xp = xp * x
            return out
        re, im = self._interp
        return re(x) + 1j * im(x)

    def weighted_l1_certificate(self, nu1, T, n=4000):
        """Quadrature value of int_0^T x^{1 - 2 nu_1} ||Q(x)|| dx.

        Must be finite for the Volterra constructions to contract; raises
        if the quadrature detects a non-integrable endpoint.
        """
        if self.is_zero:
            return 0.0
        gamma = grading_exponent([max(nu1, 1e-3)])
        s = np.linspace(0.0, 1.0, n + 1)
        x = T * s**gamma
        w = np.zeros_like(s)
        w[1:] = x[1:] ** (1.0 - 2.0 * nu1) * matnorm(self(x[1:]))
        jac = gamma * T * np.where(s > 0, s, 1.0) ** (gamma - 1)
        jac[0] = 0.0
        val = float(np.real(cumquad4(w * jac, 1.0 / n)[-1]))
        if not np.isfinite(val):
            raise DomainError(
                "weighted L1 certificate is not finite: "
                "x^{1-2 nu_1} Q(x) must be integrable on (0, T)"
            )
        return val
