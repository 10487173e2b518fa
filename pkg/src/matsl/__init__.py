"""Matrix Sturm-Liouville equation with a Bessel-type singularity.

Fundamental systems of solutions (series, Jost, Bessel-type, Birkhoff-type),
Stokes multipliers connecting them, and the spectral data (eigenvalues and
weight matrices) of the associated boundary value problem.
"""

from .birkhoff import (
    BirkhoffSolve,
    kernel_bound,
    solve_Y,
    successive_approximation_report,
)
from .errors import (
    AccuracyError,
    ConfigError,
    ContourError,
    ContractionError,
    DomainError,
    LocalizationError,
    MatslError,
    PicardConvergenceError,
    PoleProximityError,
    RegimeError,
)
from .fitting import FitReport, intercept_vs_rate, loglog_slope
from .grids import Grid, build_grid, cumquad4
from .matrixfss import (
    FssEvaluation,
    SingularOrder,
    build_diagonal,
    diag_c,
    diag_e,
    entirety_probe,
    solve_S,
    solve_S_star,
    volterra_residual,
    wronskian,
)
from .potential import Potential, matnorm
from .scalar import (
    BetaConstants,
    JostSolution,
    ScalarBasis,
    ScalarOrder,
    SeriesSolution,
    basis_for,
    beta_constants,
    eval_c,
    eval_jost,
    jost_solution,
    ode_residual,
    series_coeffs,
)
from .spectral import (
    AsymptoticConstants,
    BoundaryProblem,
    SolverOptions,
    SpectralDatum,
    WeylSample,
    char_det,
    count_inside,
    default_radius,
    eigenvalue_decay_report,
    frac_parts,
    group_weights,
    locate_contour,
    locate_eigenvalues,
    locate_low,
    phi,
    recover_nu,
    residues_per_root,
    rho0_center,
    sigma_forms,
    spectral_classes,
    theta_constants,
    verify_weight_asymptotics,
    weights_for,
    weyl,
    weyl_partial_fraction,
)
from .stokes import (
    B0_matrix,
    D_matrix,
    StokesSet,
    compute_B,
    reconstruction_residual,
    verify_S_asymptotics,
    verify_stokes_asymptotics,
)
from .oracle import (
    closed_form_reference,
    direct_integrate,
    shooting_char,
    shooting_eigenvalue,
)

__version__ = "0.1.0"
