"""Reference problems, RK4/shooting baselines and the error metrics used to compare them.

The homogeneous problem is ``y'' + 2 pi y' + (5/4) pi^2 y = 0`` on ``[1, 3]``
with base solution ``y_b = y1 + y2``; the non-homogeneous family is built
around ``f(x) = x cos(theta x)`` with constant ``p`` and ``q``.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import BlowUpError, InvalidInputError, ShootingFailure, TrigBVPError
from .linear import BoundaryConditions, LinearProblem, Solvability, solve_linear
from .operators import build_grid
from .rk4 import rk4_ivp

__all__ = [
    "TestProblem",
    "ErrorReport",
    "rk4_ivp",
    "shoot",
    "make_homogeneous_problem",
    "make_nonhomogeneous_problem",
    "error_report",
    "tiba_error",
    "rk4_benchmark",
    "convergence_study",
    "bench_rows",
    "nonhomogeneous_suite",
]

PI = math.pi


@dataclass(frozen=True)
class TestProblem:
    """Linear test problem with a known exact solution."""

    __test__ = False  # not a pytest class

    name: str
    kind: str
    bc_type: str
    s: float
    e: float
    p: Callable
    q: Callable
    r: Callable
    exact: Callable
    exact_d: Callable
    exact_dd: Callable
    bc: BoundaryConditions
    theta: Optional[float] = None
    beta_scale: float = 1.0
    expected: Optional[Solvability] = None

    def __post_init__(self):
        x = np.linspace(self.s, self.e, 100)
        y, yd, ydd = self.exact(x), self.exact_d(x), self.exact_dd(x)
        defect = ydd - (self.p(x) * yd + self.q(x) * y + self.r(x))
        scale = 1.0 + np.max(np.abs(ydd))
        if np.max(np.abs(defect)) > 1e-9 * scale:
            raise InvalidInputError(f"exact solution of {self.name} does not satisfy its ODE")

    def rhs(self, x, v, u):
        return self.p(x) * u + self.q(x) * v + self.r(x)

    def linear_problem(self):
        return LinearProblem(self.p, self.q, self.r, self.s, self.e, self.bc)

    def base_boundary_values(self):
        """``(y(s), y'(s), y(e), y'(e))`` of the exact solution."""
        return np.array(
            [self.exact(self.s), self.exact_d(self.s), self.exact(self.e), self.exact_d(self.e)],
            dtype=float,
        )


@dataclass(frozen=True)
class ErrorReport:
    max_grid_error: float
    residual_max: float
    boundary_errors: tuple


def _const(c):
    return lambda x: c + 0.0 * np.asarray(x, dtype=float)


def _bc_for(bc_type, endpoint_values, beta_scale):
    from .linear import BOUNDARY_TYPES

    try:
        D = np.array(BOUNDARY_TYPES[bc_type], dtype=float)
    except KeyError:
        raise InvalidInputError(f"unknown boundary type {bc_type!r}") from None
    alpha, beta = D @ endpoint_values
    return BoundaryConditions(D, alpha, beta_scale * beta)


def make_homogeneous_problem(bc_type, beta_scale=1.0):
    """``y'' = -2 pi y' - (5/4) pi^2 y`` on [1, 3] with data taken from ``y_b = y1 + y2``.

    ``expected`` records the solvability class the boundary type implies:
    Neumann and Mix_1 are uniquely solvable; Dirichlet and Mix_2 admit a
    one-parameter family when the data come from ``y_b`` and no solution when
    ``beta`` is rescaled.
    """

    def yb(x):
        t = np.asarray(x, dtype=float) - 1.0
        return np.exp(-PI * t) * (np.cos(PI * t / 2) + 3 * np.sin(PI * t / 2))

    def yb_d(x):
        t = np.asarray(x, dtype=float) - 1.0
        return np.exp(-PI * t) * (PI / 2 * np.cos(PI * t / 2) - 3.5 * PI * np.sin(PI * t / 2))

    def yb_dd(x):
        t = np.asarray(x, dtype=float) - 1.0
        return np.exp(-PI * t) * PI**2 * (-2.25 * np.cos(PI * t / 2) + 3.25 * np.sin(PI * t / 2))

    s, e = 1.0, 3.0
    ends = np.array([yb(s), yb_d(s), yb(e), yb_d(e)], dtype=float)
    bc = _bc_for(bc_type, ends, beta_scale)
    if bc_type in ("neumann", "mix1"):
        expected = Solvability.UNIQUE
    elif beta_scale == 1.0:
        expected = Solvability.INFINITE
    else:
        expected = Solvability.NONE
    return TestProblem(
        name=f"homogeneous-{bc_type}",
        kind="homogeneous",
        bc_type=bc_type,
        s=s,
        e=e,
        p=_const(-2 * PI),
        q=_const(-1.25 * PI**2),
        r=_const(0.0),
        exact=yb,
        exact_d=yb_d,
        exact_dd=yb_dd,
        bc=bc,
        beta_scale=beta_scale,
        expected=expected,
    )


def make_nonhomogeneous_problem(theta, bc_type, p_const=0.1, q_const=1.0):
    """``y'' = p y' + q y + r`` with ``r = f'' - p f' - q f`` and ``f = x cos(theta x)``."""
    if not (PI / 2 - 1e-12 <= theta <= 1.5 * PI + 1e-12):
        raise InvalidInputError(f"theta must lie in [pi/2, 3pi/2], got {theta}")

    def f(x):
        x = np.asarray(x, dtype=float)
        return x * np.cos(theta * x)

    def f_d(x):
        x = np.asarray(x, dtype=float)
        return np.cos(theta * x) - theta * x * np.sin(theta * x)

    def f_dd(x):
        x = np.asarray(x, dtype=float)
        return -2 * theta * np.sin(theta * x) - theta**2 * x * np.cos(theta * x)

    def r(x):
        return f_dd(x) - p_const * f_d(x) - q_const * f(x)

    s, e = 1.0, 3.0
    ends = np.array([f(s), f_d(s), f(e), f_d(e)], dtype=float)
    return TestProblem(
        name=f"nonhomogeneous-{bc_type}",
        kind="nonhomogeneous",
        bc_type=bc_type,
        s=s,
        e=e,
        p=_const(p_const),
        q=_const(q_const),
        r=r,
        exact=f,
        exact_d=f_d,
        exact_dd=f_dd,
        bc=_bc_for(bc_type, ends, 1.0),
        theta=float(theta),
        expected=Solvability.UNIQUE,
    )


def nonhomogeneous_suite():
    """The eight (boundary type, theta) pairs of the non-homogeneous comparison."""
    return [
        make_nonhomogeneous_problem(theta, bc_type)
        for bc_type in ("neumann", "dirichlet", "mix1", "mix2")
        for theta in (PI / 2, 1.5 * PI)
    ]


def error_report(report, problem):
    """Grid error against the exact solution plus the residual and boundary mismatches."""
    grid = report.grid
    sl = grid.interior_slice
    x = grid.original_points[sl]
    err = float(np.max(np.abs(report.V[sl] - problem.exact(x))))
    return ErrorReport(
        max_grid_error=err,
        residual_max=float(report.residual_max),
        boundary_errors=tuple(abs(b) for b in report.boundary_residuals),
    )


def tiba_error(problem, q, m=None, tolerance=1e-10):
    report = solve_linear(problem.linear_problem(), 2**q, m, tolerance)
    return report, error_report(report, problem)


def _boundary_mismatch(problem, y_s, u_s, steps):
    _, ys, us = rk4_ivp(problem.rhs, problem.s, problem.e, y_s, u_s, steps)
    vals = problem.bc.functionals(y_s, u_s, ys[-1], us[-1])
    return vals - problem.bc.rhs


def shoot(problem, initial_guess, max_iter=50, steps=64, tol=None):
    """Initial data ``(y(s), y'(s))`` whose RK4 trajectory meets the boundary rows.

    When the boundary rows fix both values nothing is searched.  When the
    first row fixes ``y(s)`` alone, ``y'(s)`` is found by the secant method
    on the second row; otherwise both unknowns are found by Newton's method
    with a forward-difference Jacobian.
    """
    bc = problem.bc
    D = bc.D
    scale = 1.0 + abs(bc.alpha) + abs(bc.beta)
    tol = 1e-10 * scale if tol is None else tol
    y0, u0 = (float(v) for v in initial_guess)

    if np.all(D[:, 2:] == 0):
        return tuple(float(v) for v in np.linalg.solve(D[:, :2], bc.rhs))

    def mismatch(y, u):
        try:
            return _boundary_mismatch(problem, y, u, steps)
        except BlowUpError as exc:
            raise ShootingFailure(f"trajectory blew up: {exc}", last_guess=(y, u)) from exc

    if D[0, 0] != 0 and np.all(D[0, 1:] == 0):
        y_s = float(bc.alpha / D[0, 0])
        u_prev, g_prev = u0, mismatch(y_s, u0)[1]
        if abs(g_prev) <= tol:
            return (y_s, float(u_prev))
        u_cur = u0 + 0.1 * (1.0 + abs(u0))
        for _ in range(max_iter):
            g_cur = mismatch(y_s, u_cur)[1]
            if abs(g_cur) <= tol:
                return (y_s, float(u_cur))
            slope = (g_cur - g_prev) / (u_cur - u_prev)
            if slope == 0 or not math.isfinite(slope):
                raise ShootingFailure(
                    "secant slope vanished", last_guess=(y_s, u_cur), mismatch=g_cur
                )
            u_prev, g_prev, u_cur = u_cur, g_cur, u_cur - g_cur / slope
            if not math.isfinite(u_cur):
                break
        raise ShootingFailure(
            f"secant iteration did not converge in {max_iter} steps",
            last_guess=(y_s, u_cur),
            mismatch=g_prev,
        )

    z = np.array([y0, u0])
    g = mismatch(*z)
    for _ in range(max_iter):
        if np.max(np.abs(g)) <= tol:
            return (float(z[0]), float(z[1]))
        J = np.empty((2, 2))
        for k in range(2):
            dz = np.zeros(2)
            dz[k] = 1e-6 * (1.0 + abs(z[k]))
            J[:, k] = (mismatch(*(z + dz)) - g) / dz[k]
        try:
            step = np.linalg.solve(J, -g)
        except np.linalg.LinAlgError:
            raise ShootingFailure(
                "singular shooting Jacobian", last_guess=tuple(z), mismatch=g
            ) from None
        if not np.all(np.isfinite(step)):
            break
        z = z + step
        g = mismatch(*z)
    raise ShootingFailure(
        f"Newton shooting did not converge in {max_iter} steps", last_guess=tuple(z), mismatch=g
    )


def _random_guess(problem, rng):
    y, u = rng.uniform(-5.0, 5.0, 2)
    D = problem.bc.D
    if D[0, 0] != 0 and np.all(D[0, 1:] == 0):
        y = problem.bc.alpha / D[0, 0]
    return float(y), float(u)


@dataclass
class RK4Result:
    max_grid_error: float
    y_s: float
    u_s: float
    shooting_failed: bool = False
    message: str = ""


def rk4_benchmark(problem, q, m=None, rng=None, initial_guess=None):
    """RK4 (with shooting when needed) on the grid nodes that lie in ``[s, e]``.

    Boundary types that fix ``y(s), y'(s)`` use the exact starting data;
    otherwise shooting starts from ``initial_guess`` or from a random guess
    drawn uniformly from ``[-5, 5]``.
    """
    grid = build_grid(problem.s, problem.e, 2**q, m)
    steps = grid.n
    D = problem.bc.D
    if np.all(D[:, 2:] == 0):
        y_s, u_s = shoot(problem, (0.0, 0.0), steps=steps)
    else:
        if initial_guess is None:
            rng = rng if rng is not None else np.random.default_rng(0)
            initial_guess = _random_guess(problem, rng)
        try:
            y_s, u_s = shoot(problem, initial_guess, steps=steps)
        except ShootingFailure as exc:
            guess = exc.last_guess or initial_guess
            err = _trajectory_error(problem, guess[0], guess[1], steps)
            return RK4Result(err, float(guess[0]), float(guess[1]), True, str(exc))
    return RK4Result(_trajectory_error(problem, y_s, u_s, steps), y_s, u_s)


def _trajectory_error(problem, y_s, u_s, steps):
    try:
        xs, ys, _ = rk4_ivp(problem.rhs, problem.s, problem.e, y_s, u_s, steps)
    except BlowUpError:
        return float("inf")
    return float(np.max(np.abs(ys - problem.exact(xs))))


def convergence_study(problem, q_range=(6, 7, 8, 9), solvers=("tiba", "rk4"), m=None, seed=0):
    """Max grid error per ``q`` and solver; failures are recorded in the row.

    Returns ``(rows, monotone)`` where ``monotone`` maps each solver to
    whether its error column strictly decreases.
    """
    rows = []
    rng = np.random.default_rng(seed)
    for q in q_range:
        row = {"q": int(q)}
        for name in solvers:
            try:
                if name == "tiba":
                    _, rep = tiba_error(problem, q, m)
                    row[name] = rep.max_grid_error
                elif name == "rk4":
                    res = rk4_benchmark(problem, q, m, rng=rng)
                    row[name] = res.max_grid_error
                    if res.shooting_failed:
                        row[f"{name}_note"] = "shooting failed"
                else:
                    raise InvalidInputError(f"unknown solver {name!r}")
            except TrigBVPError as exc:
                row[name] = float("nan")
                row[f"{name}_note"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    monotone = {}
    for name in solvers:
        col = [r[name] for r in rows]
        monotone[name] = all(a > b for a, b in zip(col, col[1:]))
    return rows, monotone


def bench_rows(problems, q=7, m=None, seed=0):
    """One comparison row per problem: TIBA and RK4 grid errors, residual, shooting outcome."""
    rng = np.random.default_rng(seed)
    rows = []
    for prob in problems:
        row = {"problem": prob.name, "type": prob.bc_type, "theta": prob.theta}
        try:
            report, rep = tiba_error(prob, q, m)
            row.update(
                tiba_error=rep.max_grid_error,
                residual_max=rep.residual_max,
                solvability=report.solvability.value,
            )
        except TrigBVPError as exc:
            row.update(tiba_error=float("nan"), residual_max=float("nan"), solvability=str(exc))
        res = rk4_benchmark(prob, q, m, rng=rng)
        row.update(
            rk4_error=res.max_grid_error,
            y_s=res.y_s,
            u_s=res.u_s,
            shooting="failed" if res.shooting_failed else "ok",
        )
        rows.append(row)
    return rows
