"""Odd trigonometric interpolation and smooth cut-off extension.

An odd 2b-periodic function sampled on ``N = 2M`` equispaced points of
``[-b, b)`` is reproduced exactly by a sine series of degree ``M - 1``.
The coefficients come out of a single inverse FFT.  Non-periodic data on
``[s, e]`` is handled by multiplying with a C-infinity cut-off that is 1 on
``[s, e]`` and vanishes outside ``[s - delta, e + delta]``, then shifting the
support to ``[0, b]``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "OddTrigPoly",
    "CutoffSpec",
    "interpolate_odd",
    "cutoff_eval",
    "evaluate",
    "smooth_extend",
    "smooth_step",
]


@dataclass(frozen=True)
class OddTrigPoly:
    """Sine series ``sum_{0<j<M} a_j sin(j pi (x - offset) / b)``.

    ``coeffs[j-1]`` holds ``a_j``; the ``j = 0`` term vanishes identically
    and is not stored.
    """

    half_period: float
    coeffs: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.half_period) and self.half_period > 0):
            raise InvalidInputError(f"half_period must be positive, got {self.half_period}")
        coeffs = np.array(self.coeffs, dtype=float)
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def degree(self):
        return len(self.coeffs)

    @property
    def M(self):
        return len(self.coeffs) + 1

    def __call__(self, x, order=0):
        return evaluate(self, x, order)


@dataclass(frozen=True)
class CutoffSpec:
    s: float
    e: float
    delta: float

    def __post_init__(self):
        if not (self.s < self.e):
            raise InvalidInputError(f"cut-off needs s < e, got s={self.s}, e={self.e}")
        if not self.delta > 0:
            raise InvalidInputError(f"cut-off band width must be positive, got {self.delta}")


def _is_power_of_two(n):
    return n > 0 and (n & (n - 1)) == 0


def interpolate_odd(samples, half_period):
    """Sine-series interpolant of odd periodic samples.

    Parameters
    ----------
    samples : array_like, length N = 2**(q+1), q >= 1
        ``samples[k] = f(-b + 2*b*k/N)`` for an odd, 2b-periodic ``f``.
    half_period : float
        ``b``.

    Returns
    -------
    OddTrigPoly
        Degree ``M - 1`` interpolant, ``M = N/2``.
    """
    y = np.asarray(samples, dtype=float)
    if y.ndim != 1:
        raise InvalidInputError("samples must be one-dimensional")
    N = y.size
    if N < 4 or not _is_power_of_two(N):
        raise InvalidInputError(f"sample count must be a power of two >= 4, got {N}")
    if not np.all(np.isfinite(y)):
        raise InvalidInputError("samples contain non-finite values")
    M = N // 2
    # "backward" normalization: ifft divides by N
    c = np.fft.ifft(y, norm="backward")
    j = np.arange(1, M)
    coeffs = 2.0 * c.imag[1:M] * (-1.0) ** j
    return OddTrigPoly(float(half_period), coeffs)


def smooth_step(t):
    """C-infinity ramp: 0 for t <= 0, 1 for t >= 1, monotone in between."""
    t = np.asarray(t, dtype=float)
    pos = t > 0
    neg = t < 1
    g0 = np.zeros_like(t)
    g1 = np.zeros_like(t)
    g0[pos] = np.exp(-1.0 / t[pos])
    g1[neg] = np.exp(-1.0 / (1.0 - t[neg]))
    return g0 / (g0 + g1)


def cutoff_eval(spec, x):
    """Cut-off ``h(x)``: 1 on [s, e], 0 outside [s - delta, e + delta]."""
    x = np.asarray(x, dtype=float)
    left = smooth_step((x - (spec.s - spec.delta)) / spec.delta)
    right = smooth_step(((spec.e + spec.delta) - x) / spec.delta)
    out = np.where(x < spec.s, left, np.where(x > spec.e, right, 1.0))
    return out[()] if out.ndim == 0 else out


def evaluate(poly, x, order=0):
    """Evaluate the sine series, or its first or second derivative, at ``x``."""
    if order not in (0, 1, 2):
        raise InvalidInputError(f"order must be 0, 1 or 2, got {order}")
    x = np.asarray(x, dtype=float)
    b = poly.half_period
    w = np.arange(1, poly.M) * (np.pi / b)
    phase = np.multiply.outer(x - poly.offset, w)
    if order == 0:
        out = np.sin(phase) @ poly.coeffs
    elif order == 1:
        out = np.cos(phase) @ (poly.coeffs * w)
    else:
        out = -(np.sin(phase) @ (poly.coeffs * w**2))
    return out[()] if np.ndim(out) == 0 else out


def smooth_extend(f, spec, N):
    """Interpolate ``f`` on ``[s, e]`` through its cut-off periodic extension.

    ``F(x) = h(x + o) f(x + o)`` on ``[0, b]`` with ``o = s - delta`` and
    ``b = e - s + 2 delta`` is extended as an odd ``2b``-periodic function and
    interpolated with :func:`interpolate_odd`.  The returned polynomial has
    ``offset = o`` so it is evaluated in the original coordinates.
    """
    if N < 4 or not _is_power_of_two(int(N)):
        raise InvalidInputError(f"N must be a power of two >= 4, got {N}")
    M = int(N) // 2
    o = spec.s - spec.delta
    b = spec.e + spec.delta - o
    x = np.arange(M + 1) * (b / M) + o
    h = cutoff_eval(spec, x)
    fx = np.asarray(f(x), dtype=float) * np.ones_like(x)
    if not np.all(np.isfinite(fx)):
        bad = int(np.flatnonzero(~np.isfinite(fx))[0])
        raise InvalidInputError(f"f is not finite at x={x[bad]!r}")
    F = h * fx
    F[0] = F[-1] = 0.0
    # grid -b + k*lambda, k = 0..N-1: left half is the odd reflection
    samples = np.concatenate([-F[M:0:-1], F[:M]])
    poly = interpolate_odd(samples, b)
    return OddTrigPoly(b, poly.coeffs, offset=o)
