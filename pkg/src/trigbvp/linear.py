"""Linear second-order problems ``y'' = p y' + q y + r`` with mixed boundary rows."""

import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import AmbiguousRankError, InvalidInputError, OutOfDomainError
from .operators import OdeGrid, build_grid, build_operators, recover_coeffs, series_values
from .trig import CutoffSpec, cutoff_eval

__all__ = [
    "BOUNDARY_TYPES",
    "BoundaryConditions",
    "LinearProblem",
    "Solvability",
    "RankInfo",
    "SolveReport",
    "assemble_system",
    "boundary_rows",
    "classify_solvability",
    "solve_linear",
    "evaluate_solution",
    "PROBE_POINTS",
]

# rows of D act on (y(s), y'(s), y(e), y'(e))
BOUNDARY_TYPES = {
    "neumann": ((1, 0, 0, 0), (0, 1, 0, 0)),
    "dirichlet": ((1, 0, 0, 0), (0, 0, 1, 0)),
    "mix1": ((1, 0, 0, 0), (0, 0, 0, 1)),
    "mix2": ((1, 1, 0, 0), (0, 0, 1, 1)),
}

PROBE_POINTS = 2**10


@dataclass(frozen=True)
class BoundaryConditions:
    D: np.ndarray
    alpha: float
    beta: float

    def __post_init__(self):
        D = np.array(self.D, dtype=float)
        if D.shape != (2, 4):
            raise InvalidInputError(f"D must be 2x4, got shape {D.shape}")
        if not np.all(np.isfinite(D)) or not np.isfinite(self.alpha) or not np.isfinite(self.beta):
            raise InvalidInputError("boundary data must be finite")
        if np.linalg.matrix_rank(D) != 2:
            raise InvalidInputError("boundary matrix D must have rank 2")
        D.setflags(write=False)
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))

    @classmethod
    def preset(cls, name, alpha, beta):
        try:
            D = BOUNDARY_TYPES[name.lower()]
        except KeyError:
            raise InvalidInputError(
                f"unknown boundary type {name!r}; expected one of {sorted(BOUNDARY_TYPES)}"
            ) from None
        return cls(np.array(D, dtype=float), alpha, beta)

    @property
    def rhs(self):
        return np.array([self.alpha, self.beta])

    def functionals(self, y_s, u_s, y_e, u_e):
        """Values of both boundary rows for the given endpoint data."""
        return self.D @ np.array([y_s, u_s, y_e, u_e], dtype=float)


def _sample(fn, x, name):
    vals = np.asarray(fn(x), dtype=float)
    vals = np.broadcast_to(vals, np.shape(x)).astype(float)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        idx = int(np.flatnonzero(bad)[0])
        raise InvalidInputError(f"{name}(x) is not finite at x={np.ravel(x)[idx]!r}")
    return vals


@dataclass(frozen=True)
class LinearProblem:
    """``y'' = p(x) y' + q(x) y + r(x)`` on ``[s, e]``.

    ``p``, ``q`` and ``r`` must accept numpy arrays.
    """

    p: Callable
    q: Callable
    r: Callable
    s: float
    e: float
    bc: BoundaryConditions

    def __post_init__(self):
        if not self.s < self.e:
            raise InvalidInputError(f"need s < e, got ({self.s}, {self.e})")

    def rhs(self, x, v, u):
        return self.p(x) * u + self.q(x) * v + self.r(x)

    def as_nonlinear(self):
        from .nonlinear import NonlinearProblem, NonlinearRHS

        rhs = NonlinearRHS(
            f=self.rhs,
            df_dv=lambda x, v, u: self.q(x) + 0.0 * v,
            df_du=lambda x, v, u: self.p(x) + 0.0 * u,
        )
        return NonlinearProblem(rhs, self.s, self.e, self.bc)


class Solvability(str, enum.Enum):
    UNIQUE = "unique"
    INFINITE = "infinite"
    NONE = "none"


@dataclass(frozen=True)
class RankInfo:
    solvability: Solvability
    rank_phi: int
    rank_aug: int
    singular_values: np.ndarray
    singular_values_aug: np.ndarray
    ambiguous: bool = False


@dataclass(frozen=True)
class SolveReport:
    V: np.ndarray
    a0: float
    a1: float
    B: np.ndarray
    solvability: Solvability
    rank_phi: int
    rank_aug: int
    condition_estimate: float
    residual_max: float
    grid: OdeGrid
    boundary_residuals: tuple = (0.0, 0.0)
    method: str = "linear"
    trace: tuple = field(default=())

    @property
    def iterations(self):
        return max(len(self.trace) - 1, 0)

    def __call__(self, x, order=0):
        return evaluate_solution(self, x, order)


def boundary_rows(bc, grid, A):
    """Rows 0 and M of the system: both boundary functionals as linear forms in V."""
    m, e_idx = grid.m, grid.m + grid.n
    D = bc.D
    rows = np.zeros((2, grid.M + 1))
    for r in range(2):
        rows[r] = D[r, 1] * A[m] + D[r, 3] * A[e_idx]
        rows[r, m] += D[r, 0]
        rows[r, e_idx] += D[r, 2]
    return rows


def _interior_stencil(grid):
    """``V``-part of the negated discrete ODE rows without the Theta terms."""
    M, b = grid.M, grid.b
    K = np.arange(1, M)
    c = np.pi**2 / b**2
    T = np.zeros((M - 1, M + 1))
    T[:, 0] = -(M - K) * c / M
    T[:, M] = -K * c / M
    T[:, 1:M] = c * np.eye(M - 1)
    return T


def _cutoff(grid):
    return CutoffSpec(grid.s, grid.e, grid.delta)


def assemble_system(problem, grid, ops):
    """Build ``Phi`` and ``Psi`` of the ``(M+1)``-dimensional linear system."""
    M = grid.M
    if ops.M != M:
        raise InvalidInputError("grid and operators were built for different M")
    x = grid.original_points[1:M]
    h = cutoff_eval(_cutoff(grid), x)
    P = h * _sample(problem.p, x, "p")
    Q = h * _sample(problem.q, x, "q")
    R = h * _sample(problem.r, x, "r")
    theta, A = ops.Theta, ops.A

    Phi = np.zeros((M + 1, M + 1))
    Phi[[0, M]] = boundary_rows(problem.bc, grid, A)
    interior = _interior_stencil(grid)
    interior[:, 1:M] += theta * Q
    interior += (theta * P) @ A[1:M]
    Phi[1:M] = interior

    Psi = np.empty(M + 1)
    Psi[0] = problem.bc.alpha
    Psi[M] = problem.bc.beta
    Psi[1:M] = -(theta @ R)
    return Phi, Psi


def classify_solvability(Phi, Psi, tolerance=1e-10, band=None):
    """Compare ranks of ``Phi`` and ``[Phi | Psi]``.

    A singular value counts as zero when it is at most ``tolerance`` times the
    largest one.  When ``band`` is given, a singular value within a factor
    ``band`` of the cut-off marks the result as ambiguous.
    """
    if not 0 < tolerance < 1:
        raise InvalidInputError(f"tolerance must lie in (0, 1), got {tolerance}")
    Phi = np.asarray(Phi, dtype=float)
    Psi = np.asarray(Psi, dtype=float)
    n = Phi.shape[0]
    if Phi.shape != (n, n) or Psi.shape != (n,):
        raise InvalidInputError("Phi must be square and Psi must match its size")

    def ranks(mat):
        sv = np.linalg.svd(mat, compute_uv=False)
        if sv.size == 0 or sv[0] == 0:
            return 0, sv, False
        cut = tolerance * sv[0]
        ambiguous = band is not None and bool(np.any((sv > cut / band) & (sv < cut * band)))
        return int(np.sum(sv > cut)), sv, ambiguous

    r_phi, sv, amb1 = ranks(Phi)
    r_aug, sv_aug, amb2 = ranks(np.column_stack([Phi, Psi]))
    if r_phi == n:
        kind = Solvability.UNIQUE
    elif r_aug > r_phi:
        kind = Solvability.NONE
    else:
        kind = Solvability.INFINITE
    return RankInfo(kind, r_phi, r_aug, sv, sv_aug, amb1 or amb2)


def _residual_probe(grid, a0, a1, B, rhs):
    x = np.linspace(0.0, grid.b, PROBE_POINTS)
    v = series_values(a0, a1, B, grid.b, x, 0)
    u = series_values(a0, a1, B, grid.b, x, 1)
    z = series_values(a0, a1, B, grid.b, x, 2)
    xo = x + grid.offset
    h = cutoff_eval(_cutoff(grid), xo)
    with np.errstate(all="ignore"):
        f = h * np.broadcast_to(np.asarray(rhs(xo, v, u), dtype=float), x.shape)
    return float(np.max(np.abs(z - f)))


def _boundary_residuals(bc, grid, a0, a1, B):
    xs = grid.to_shifted([grid.s, grid.e])
    v = series_values(a0, a1, B, grid.b, xs, 0)
    u = series_values(a0, a1, B, grid.b, xs, 1)
    vals = bc.functionals(v[0], u[0], v[1], u[1]) - bc.rhs
    return (float(vals[0]), float(vals[1]))


def _finish_report(V, grid, ops, bc, rhs, *, solvability, rank_phi, rank_aug, cond, method, trace=()):
    a0, a1, B = recover_coeffs(V, grid, ops.S)
    V = np.array(V, dtype=float)
    B = np.array(B)
    V.setflags(write=False)
    B.setflags(write=False)
    return SolveReport(
        V=V,
        a0=float(a0),
        a1=float(a1),
        B=B,
        solvability=solvability,
        rank_phi=rank_phi,
        rank_aug=rank_aug,
        condition_estimate=cond,
        residual_max=_residual_probe(grid, a0, a1, B, rhs),
        grid=grid,
        boundary_residuals=_boundary_residuals(bc, grid, a0, a1, B),
        method=method,
        trace=tuple(trace),
    )


def solve_linear(problem, M, m=None, tolerance=1e-10, ambiguity_band=3.0):
    """Discretize and solve a linear problem; classify solvability on the way.

    Parameters
    ----------
    problem : LinearProblem
    M : int
        Power of two; the grid has ``M + 1`` points.
    m : int, optional
        Padding index (defaults to ``M // 4``).
    tolerance : float
        Relative singular-value cut-off for the rank decision.
    ambiguity_band : float or None
        Raise :class:`AmbiguousRankError` when a singular value lies within
        this factor of the cut-off; ``None`` disables the check.

    Returns
    -------
    SolveReport
        For ``INFINITE`` the minimum-norm solution is returned; for ``NONE``
        a least-squares ``V`` (diagnostic only).
    """
    grid = build_grid(problem.s, problem.e, M, m)
    ops = build_operators(grid)
    Phi, Psi = assemble_system(problem, grid, ops)
    info = classify_solvability(Phi, Psi, tolerance, band=ambiguity_band)
    if info.ambiguous:
        raise AmbiguousRankError(
            "rank of Phi is ambiguous at the requested tolerance",
            candidate_ranks=sorted({info.rank_phi, info.rank_aug, min(info.rank_phi + 1, M + 1)}),
        )
    sv = info.singular_values
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")
    if info.solvability is Solvability.UNIQUE:
        V = np.linalg.solve(Phi, Psi)
    else:
        V = np.linalg.lstsq(Phi, Psi, rcond=tolerance)[0]
    return _finish_report(
        V,
        grid,
        ops,
        problem.bc,
        problem.rhs,
        solvability=info.solvability,
        rank_phi=info.rank_phi,
        rank_aug=info.rank_aug,
        cond=cond,
        method="linear",
    )


def evaluate_solution(report, x, order=0):
    """Solution (order 0) or its derivatives at original coordinates ``x`` in ``[s, e]``."""
    grid = report.grid
    x = np.asarray(x, dtype=float)
    slack = 1e-12 * max(1.0, abs(grid.s), abs(grid.e))
    if np.any(x < grid.s - slack) or np.any(x > grid.e + slack):
        raise OutOfDomainError(f"x must lie in [{grid.s}, {grid.e}]")
    return series_values(report.a0, report.a1, report.B, grid.b, grid.to_shifted(x), order)
