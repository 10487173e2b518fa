"""Exception taxonomy.

Three broad classes matter to callers and to the CLI exit-code mapping:
domain errors (inputs outside a method's validated region), accuracy
errors (a computation ran but failed its own consistency check), and
regime errors (asymptotic machinery applied below its regime).
"""


class MatslError(Exception):
    """Base class for all library errors."""


class DomainError(MatslError):
    """Input outside the validated domain of a method."""


class AccuracyError(MatslError):
    """A result failed an internal cross-check or did not converge."""


class RegimeError(MatslError):
    """Asymptotic machinery invoked below its regime of validity."""


class ConfigError(DomainError):
    """Problem configuration failed validation.

    Carries the offending field name so tooling can point at it.
    """

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"config field '{field}': {message}")


class ContractionError(RegimeError):
    """Birkhoff kernel bound came out >= 1/2 at the requested rho.

    Carries the measured bound so callers can raise their rho cutoff.
    """

    def __init__(self, rho, bound):
        self.rho = rho
        self.bound = bound
        super().__init__(
            f"kernel bound {bound:.4g} >= 0.5 at rho={rho:.6g}; "
            "increase |rho| or reduce the potential"
        )


class PicardConvergenceError(AccuracyError):
    """Successive approximations did not contract on the given grid."""

    def __init__(self, delta, iterations):
        self.delta = delta
        self.iterations = iterations
        super().__init__(
            f"Picard iteration stalled at delta={delta:.3g} "
            f"after {iterations} iterations; refine the grid"
        )


class ContourError(AccuracyError):
    """A contour passed too close to a zero, or its quadrature stalled."""


class LocalizationError(AccuracyError):
    """Eigenvalue localization could not account for all roots."""


class PoleProximityError(AccuracyError):
    """Weyl matrix requested too close to a pole.

    Carries a crude distance estimate from the conditioning of V(phi).
    """

    def __init__(self, lam, conditioning):
        self.lam = lam
        self.conditioning = conditioning
        super().__init__(
            f"V(phi) nearly singular at lambda={lam:.6g} "
            f"(cond ~ {conditioning:.3g}); lambda is too close to an eigenvalue"
        )
