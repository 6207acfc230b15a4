"""Spectral solver for two-point boundary value problems via odd trigonometric interpolation."""

from .errors import (
    AmbiguousRankError,
    BlowUpError,
    EvaluationError,
    InvalidInputError,
    InvalidPaddingError,
    NonConvergenceError,
    OutOfDomainError,
    ShootingFailure,
    SingularJacobianError,
    TrigBVPError,
)
from .linear import (
    BOUNDARY_TYPES,
    BoundaryConditions,
    LinearProblem,
    Solvability,
    SolveReport,
    assemble_system,
    classify_solvability,
    evaluate_solution,
    solve_linear,
)
from .nonlinear import NewtonOptions, NonlinearProblem, NonlinearRHS, jacobian, residual, solve_nonlinear
from .operators import (
    OdeGrid,
    SpectralOperators,
    build_A,
    build_grid,
    build_operators,
    build_S_C,
    build_theta,
    recover_coeffs,
)
from .trig import CutoffSpec, OddTrigPoly, cutoff_eval, evaluate, interpolate_odd, smooth_extend

__version__ = "0.1.0"
