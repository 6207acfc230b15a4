"""Grid construction and the dense operator matrices of the collocation scheme.

On the shifted domain ``[0, b]`` with ``x_k = k b / M`` the unknowns are the
grid values ``V = (v_0, ..., v_M)`` of

    v(x) = a1 + a0 x - (b/pi)^2 sum_{0<j<M} B_j / j^2 sin(j pi x / b)

whose second derivative is the sine series ``sum B_j sin(j pi x / b)``.
Everything here maps between ``V``, the first derivative values ``U = A V``
and the coefficient triple ``(a0, a1, B)``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, InvalidPaddingError

__all__ = [
    "OdeGrid",
    "SpectralOperators",
    "build_grid",
    "default_padding",
    "build_S_C",
    "build_theta",
    "build_A",
    "build_operators",
    "recover_coeffs",
    "series_values",
]


def _check_power_of_two(M, minimum=2):
    if int(M) != M or M < minimum or (int(M) & (int(M) - 1)):
        raise InvalidInputError(f"M must be a power of two >= {minimum}, got {M}")
    return int(M)


@dataclass(frozen=True)
class OdeGrid:
    """Equispaced grid on ``[0, b]``; ``s`` sits at index ``m``, ``e`` at ``m + n``."""

    s: float
    e: float
    M: int
    m: int
    n: int
    delta: float
    b: float
    offset: float

    @property
    def lam(self):
        return self.b / self.M

    @property
    def points(self):
        """Shifted grid ``x_k = k b / M``, k = 0..M."""
        return np.arange(self.M + 1) * self.lam

    @property
    def original_points(self):
        return self.points + self.offset

    @property
    def interior_slice(self):
        """Indices of the grid points lying in ``[s, e]``."""
        return slice(self.m, self.m + self.n + 1)

    def to_shifted(self, x):
        return np.asarray(x, dtype=float) - self.offset


def default_padding(M):
    """Padding index used when none is given: ``m = M/4`` (``delta = (e-s)/2``)."""
    return max(1, int(M) // 4)


def build_grid(s, e, M, m=None):
    """Place ``[s, e]`` on grid indices ``m`` and ``M - m`` of a padded domain.

    ``delta = m (e - s) / (M - 2m)`` and ``b = (e - s) M / (M - 2m)``, so
    both endpoints fall exactly on grid points.
    """
    M = _check_power_of_two(M, minimum=4)
    if not (np.isfinite(s) and np.isfinite(e) and s < e):
        raise InvalidInputError(f"need finite s < e, got s={s}, e={e}")
    if m is None:
        m = default_padding(M)
    if int(m) != m:
        raise InvalidPaddingError(f"padding index must be an integer, got {m}")
    m = int(m)
    if not 0 < m < M / 2:
        raise InvalidPaddingError(f"padding index must satisfy 0 < m < M/2 = {M // 2}, got {m}")
    n = M - 2 * m
    L = e - s
    delta = m * L / n
    b = L * M / n
    return OdeGrid(s=float(s), e=float(e), M=M, m=m, n=n, delta=delta, b=b, offset=s - delta)


def build_S_C(M):
    """Sine and cosine matrices ``sin(2 pi j k / N)``, ``cos(...)``, ``1 <= j, k < M``."""
    M = _check_power_of_two(M, minimum=2)
    K = np.arange(1, M)
    # reduce j*k mod N in integers to keep the arguments small
    jk = np.outer(K, K) % (2 * M)
    arg = (np.pi / M) * jk
    return np.sin(arg), np.cos(arg)


def build_theta(S, K, M):
    """``Theta = (2/M) S diag(1/K^2) S``; symmetric."""
    K = np.asarray(K, dtype=float)
    theta = (2.0 / M) * (S * (1.0 / K**2)) @ S
    return 0.5 * (theta + theta.T)


def _cot_pi_over_N(k, N):
    """``Cot(k pi / N)`` with the convention ``Cot = 0`` when ``k`` is a multiple of ``N``."""
    k = np.asarray(k)
    # cot is pi-periodic: fold k into (-N/2, N/2] so tan never sees arguments near pi
    r = np.mod(k, N)
    r = np.where(r > N // 2, r - N, r)
    out = np.zeros(r.shape, dtype=float)
    nz = (r != 0) & (2 * r != N)
    out[nz] = 1.0 / np.tan(np.pi * r[nz] / N)
    return out


def build_A(grid):
    """Matrix ``A`` with ``U = A V`` from its closed-form entries.

    Row 0 and row M are the endpoint derivatives, rows ``0 < i < M`` use the
    pair sum ``cot(k, i) = Cot((k+i) pi/N) + Cot((k-i) pi/N)``.
    """
    M = grid.M
    b = grid.b
    N = 2 * M
    K = np.arange(1, M)
    Ia = (-1.0) ** K
    cotK = 1.0 / np.tan(np.pi * K / N)
    # tan(pi K / N) = cot(pi (M - K) / N), accurate near pi/2
    tanK = 1.0 / np.tan(np.pi * (M - K) / N)
    A = np.zeros((M + 1, M + 1))

    sum_ia_k_cot = np.sum(Ia * K * cotK)
    A[0, 0] = np.pi / b * np.sum(Ia * cotK) - np.pi / (b * M) * sum_ia_k_cot - 1.0 / b
    A[0, 1:M] = -np.pi / b * Ia * cotK
    A[0, M] = np.pi / (b * M) * sum_ia_k_cot + 1.0 / b

    i = K[:, None]
    k = K[None, :]
    cot_ik = _cot_pi_over_N(k + i, N) + _cot_pi_over_N(k - i, N)
    signed = (-1.0) ** (i + k) * cot_ik
    row_sum = signed.sum(axis=1)
    row_ksum = (signed * k).sum(axis=1)
    A[1:M, 0] = np.pi / (2 * b) * row_sum - np.pi / (2 * b * M) * row_ksum - 1.0 / b
    A[1:M, 1:M] = -np.pi / (2 * b) * signed
    A[1:M, M] = np.pi / (2 * b * M) * row_ksum + 1.0 / b

    sum_k_cot = np.sum(K * cotK)
    A[M, 0] = -np.pi / b * np.sum(Ia * tanK) - np.pi / (b * M) * sum_k_cot - 1.0 / b
    A[M, 1:M] = np.pi / b * Ia * tanK
    A[M, M] = np.pi / (b * M) * sum_k_cot + 1.0 / b
    return A


@dataclass(frozen=True)
class SpectralOperators:
    M: int
    S: np.ndarray
    C: np.ndarray
    Theta: np.ndarray
    A: np.ndarray
    K: np.ndarray
    I: np.ndarray
    I_a: np.ndarray


def build_operators(grid):
    M = grid.M
    S, C = build_S_C(M)
    K = np.arange(1, M)
    for mat in (S, C):
        mat.setflags(write=False)
    theta = build_theta(S, K, M)
    A = build_A(grid)
    for mat in (theta, A):
        mat.setflags(write=False)
    return SpectralOperators(
        M=M,
        S=S,
        C=C,
        Theta=theta,
        A=A,
        K=K,
        I=np.ones(M - 1),
        I_a=(-1.0) ** K,
    )


def recover_coeffs(V, grid, S):
    """Coefficients ``(a0, a1, B)`` of the series that interpolates ``V``."""
    V = np.asarray(V, dtype=float)
    M = grid.M
    b = grid.b
    if V.shape != (M + 1,):
        raise InvalidInputError(f"V must have length M+1 = {M + 1}, got {V.shape}")
    K = np.arange(1, M, dtype=float)
    a0 = (V[M] - V[0]) / b
    a1 = V[0]
    inner = (
        (2 * a1 * np.pi**2 / (M * b**2))
        + (2 * a0 * np.pi**2 / (b * M**2)) * K
        - (2 * np.pi**2 / (M * b**2)) * V[1:M]
    )
    B = K**2 * (S @ inner)
    return a0, a1, B


def series_values(a0, a1, B, b, x, order=0):
    """Evaluate ``v`` (order 0), ``u = v'`` (1) or ``z = v''`` (2) at shifted ``x``."""
    x = np.asarray(x, dtype=float)
    B = np.asarray(B, dtype=float)
    K = np.arange(1, len(B) + 1, dtype=float)
    phase = np.multiply.outer(x, K * (np.pi / b))
    if order == 0:
        out = a1 + a0 * x - (b / np.pi) ** 2 * (np.sin(phase) @ (B / K**2))
    elif order == 1:
        out = a0 - (b / np.pi) * (np.cos(phase) @ (B / K))
    elif order == 2:
        out = np.sin(phase) @ B
    else:
        raise InvalidInputError(f"order must be 0, 1 or 2, got {order}")
    return out[()] if np.ndim(out) == 0 else out
