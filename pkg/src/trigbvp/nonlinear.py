"""General ``y'' = f(x, y, y')`` through Newton iteration on the grid values.

The residual is written with the same sign convention as the linear system,
so for ``f = p u + q v + r`` it equals ``Phi V - Psi`` and the Jacobian is
``Phi``.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import (
    EvaluationError,
    InvalidInputError,
    NonConvergenceError,
    SingularJacobianError,
)
from .linear import (
    BoundaryConditions,
    Solvability,
    _cutoff,
    _finish_report,
    _interior_stencil,
    boundary_rows,
)
from .operators import build_grid, build_operators
from .rk4 import rk4_ivp
from .trig import cutoff_eval

__all__ = [
    "NonlinearRHS",
    "NonlinearProblem",
    "NewtonOptions",
    "residual",
    "jacobian",
    "initial_guess",
    "solve_nonlinear",
]


@dataclass(frozen=True)
class NonlinearRHS:
    """``f(x, v, u)`` and its partial derivatives; all vectorized over numpy arrays."""

    f: Callable
    df_dv: Callable
    df_du: Callable

    def check_partials(self, x, v, u, rtol=1e-5):
        """Compare the partials with central differences of ``f``; return the worst error."""
        x, v, u = (np.asarray(a, dtype=float) for a in (x, v, u))
        worst = 0.0
        for name, analytic, bump in (
            ("df_dv", self.df_dv, lambda d: (x, v + d, u)),
            ("df_du", self.df_du, lambda d: (x, v, u + d)),
        ):
            d = 1e-6 * np.maximum(1.0, np.abs(v if name == "df_dv" else u))
            fd = (self.f(*bump(d)) - self.f(*bump(-d))) / (2 * d)
            exact = np.asarray(analytic(x, v, u), dtype=float)
            err = np.abs(fd - exact) / np.maximum(1.0, np.abs(exact))
            worst = max(worst, float(np.max(err)))
            if worst > rtol:
                raise InvalidInputError(
                    f"{name} disagrees with finite differences of f (relative error {worst:.2e})"
                )
        return worst


@dataclass(frozen=True)
class NonlinearProblem:
    rhs: NonlinearRHS
    s: float
    e: float
    bc: BoundaryConditions
    validate: bool = True

    def __post_init__(self):
        if not self.s < self.e:
            raise InvalidInputError(f"need s < e, got ({self.s}, {self.e})")
        if self.validate:
            rng = np.random.default_rng(0)
            x = rng.uniform(self.s, self.e, 16)
            v = rng.uniform(-1, 1, 16)
            u = rng.uniform(-1, 1, 16)
            self.rhs.check_partials(x, v, u)


@dataclass(frozen=True)
class NewtonOptions:
    max_iterations: int = 50
    residual_tolerance: Optional[float] = None  # None: 1e-10 * (1 + |H(0)|_inf)
    step_tolerance: float = 1e-14
    min_step: float = 2.0**-20
    rank_tolerance: float = 1e-13

    def __post_init__(self):
        if self.max_iterations < 1:
            raise InvalidInputError("max_iterations must be >= 1")
        if self.residual_tolerance is not None and not self.residual_tolerance > 0:
            raise InvalidInputError("residual_tolerance must be positive")
        if not (self.step_tolerance > 0 and 0 < self.min_step <= 1 and self.rank_tolerance > 0):
            raise InvalidInputError("step_tolerance, min_step and rank_tolerance must be positive")


def _grid_rhs(V, problem, grid, ops, with_partials=False):
    M = grid.M
    x = grid.original_points
    U = ops.A @ V
    h = cutoff_eval(_cutoff(grid), x[1:M])
    args = (x[1:M], V[1:M], U[1:M])
    with np.errstate(all="ignore"):
        f = np.broadcast_to(np.asarray(problem.rhs.f(*args), dtype=float), (M - 1,))
    bad = ~np.isfinite(f)
    if np.any(bad):
        idx = int(np.flatnonzero(bad)[0]) + 1
        raise EvaluationError(f"f is not finite at grid index {idx} (x={x[idx]!r})", index=idx)
    if not with_partials:
        return h * f, None, None
    with np.errstate(all="ignore"):
        fv = np.broadcast_to(np.asarray(problem.rhs.df_dv(*args), dtype=float), (M - 1,))
        fu = np.broadcast_to(np.asarray(problem.rhs.df_du(*args), dtype=float), (M - 1,))
    bad = ~(np.isfinite(fv) & np.isfinite(fu))
    if np.any(bad):
        idx = int(np.flatnonzero(bad)[0]) + 1
        raise EvaluationError(f"partials of f are not finite at grid index {idx}", index=idx)
    return h * f, h * fv, h * fu


def residual(V, problem, grid, ops):
    """Boundary mismatches in rows 0 and M, discrete ODE defect in between."""
    V = np.asarray(V, dtype=float)
    M = grid.M
    F, _, _ = _grid_rhs(V, problem, grid, ops)
    H = np.empty(M + 1)
    rows = boundary_rows(problem.bc, grid, ops.A)
    H[0] = rows[0] @ V - problem.bc.alpha
    H[M] = rows[1] @ V - problem.bc.beta
    H[1:M] = _interior_stencil(grid) @ V + ops.Theta @ F
    return H


def jacobian(V, problem, grid, ops):
    V = np.asarray(V, dtype=float)
    M = grid.M
    _, fv, fu = _grid_rhs(V, problem, grid, ops, with_partials=True)
    J = np.zeros((M + 1, M + 1))
    J[[0, M]] = boundary_rows(problem.bc, grid, ops.A)
    inner = fu[:, None] * ops.A[1:M]
    inner[:, 1:M] += np.diag(fv)
    J[1:M] = _interior_stencil(grid) + ops.Theta @ inner
    return J


def _fixes_start(bc):
    """``(y(s), y'(s))`` if the boundary rows pin them down, else ``None``."""
    D = bc.D
    if np.any(D[:, 2:] != 0):
        return None
    left = D[:, :2]
    if abs(np.linalg.det(left)) < 1e-12 * max(1.0, np.abs(left).max() ** 2):
        return None
    return np.linalg.solve(left, bc.rhs)


def initial_guess(problem, grid, initial=None):
    """Starting grid values for Newton.

    ``initial`` may be an array of length ``M + 1``, ``"rk4"``, ``"line"`` or
    ``None``.  ``None`` integrates the padded ODE with RK4 from ``s`` when the
    boundary rows fix ``y(s)`` and ``y'(s)``, and otherwise uses the straight
    line that best matches the boundary rows.
    """
    M = grid.M
    if initial is not None and not isinstance(initial, str):
        V0 = np.array(initial, dtype=float)
        if V0.shape != (M + 1,):
            raise InvalidInputError(f"initial guess must have length {M + 1}")
        return V0
    start = _fixes_start(problem.bc)
    if initial == "rk4" and start is None:
        raise InvalidInputError("rk4 warm start needs boundary rows that fix y(s) and y'(s)")
    if initial in (None, "rk4") and start is not None:
        spec = _cutoff(grid)

        def f_h(x, v, u):
            return cutoff_eval(spec, x) * problem.rhs.f(x, v, u)

        x = grid.original_points
        try:
            _, yr, _ = rk4_ivp(f_h, grid.s, x[M], start[0], start[1], M - grid.m)
            _, yl, _ = rk4_ivp(f_h, grid.s, x[0], start[0], start[1], grid.m)
        except ArithmeticError:
            pass
        else:
            return np.concatenate([yl[::-1], yr[1:]])
    elif initial not in (None, "line", "rk4"):
        raise InvalidInputError(f"unknown initial guess strategy {initial!r}")
    # straight line c0 + c1 x through the boundary rows
    D = problem.bc.D
    L = np.column_stack(
        [D[:, 0] + D[:, 2], D[:, 0] * grid.s + D[:, 1] + D[:, 2] * grid.e + D[:, 3]]
    )
    c = np.linalg.lstsq(L, problem.bc.rhs, rcond=None)[0]
    return c[0] + c[1] * grid.original_points


def solve_nonlinear(problem, M, m=None, initial=None, opts=None):
    """Damped Newton on the ``M + 1`` grid equations.

    Steps are halved until the max-norm residual decreases; the iteration
    stops once it falls below the residual tolerance.
    """
    opts = opts or NewtonOptions()
    grid = build_grid(problem.s, problem.e, M, m)
    ops = build_operators(grid)
    V = initial_guess(problem, grid, initial)

    tol = opts.residual_tolerance
    if tol is None:
        scale = np.max(np.abs(residual(np.zeros(M + 1), problem, grid, ops)))
        tol = 1e-10 * (1.0 + scale)

    H = residual(V, problem, grid, ops)
    norm = float(np.max(np.abs(H)))
    trace = [norm]
    J = None
    for _ in range(opts.max_iterations):
        if norm <= tol:
            break
        J = jacobian(V, problem, grid, ops)
        sv = np.linalg.svd(J, compute_uv=False)
        rank = int(np.sum(sv > opts.rank_tolerance * sv[0]))
        if rank < M + 1:
            raise SingularJacobianError(f"Jacobian has rank {rank} < {M + 1}", rank=rank, trace=trace)
        step = np.linalg.solve(J, -H)
        t = 1.0
        while True:
            V_try = V + t * step
            H_try = residual(V_try, problem, grid, ops)
            n_try = float(np.max(np.abs(H_try)))
            if n_try < norm or n_try <= tol:
                break
            t *= 0.5
            if t < opts.min_step:
                raise NonConvergenceError(
                    f"line search stalled at residual {norm:.3e}", trace=trace
                )
        V, H, norm = V_try, H_try, n_try
        trace.append(norm)
        if t == 1.0 and np.max(np.abs(step)) <= opts.step_tolerance * (1.0 + np.max(np.abs(V))):
            break
    else:
        if norm > tol:
            raise NonConvergenceError(
                f"no convergence after {opts.max_iterations} iterations (residual {norm:.3e})",
                trace=trace,
            )
    if norm > tol:
        raise NonConvergenceError(f"stalled at residual {norm:.3e} above tolerance {tol:.3e}", trace=trace)

    J = jacobian(V, problem, grid, ops)
    sv = np.linalg.svd(J, compute_uv=False)
    rank = int(np.sum(sv > opts.rank_tolerance * sv[0]))
    return _finish_report(
        V,
        grid,
        ops,
        problem.bc,
        problem.rhs.f,
        solvability=Solvability.UNIQUE,
        rank_phi=rank,
        rank_aug=rank,
        cond=float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf"),
        method="newton",
        trace=trace,
    )
