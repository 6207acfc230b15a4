"""Classic fourth-order Runge-Kutta for ``y'' = f(x, y, y')``."""

import math

import numpy as np

from .errors import BlowUpError, InvalidInputError


def rk4_ivp(f, s, e, y0, u0, steps):
    """Integrate ``(y, u)' = (u, f(x, y, u))`` from ``s`` to ``e`` in ``steps`` equal steps.

    ``e < s`` integrates backwards.  Returns the node abscissae and the ``y``
    and ``u`` trajectories, each of length ``steps + 1``.
    """
    steps = int(steps)
    if steps < 1:
        raise InvalidInputError(f"steps must be >= 1, got {steps}")
    h = (e - s) / steps
    xs = s + h * np.arange(steps + 1)
    xs[-1] = e
    ys = np.empty(steps + 1)
    us = np.empty(steps + 1)
    y, u = float(y0), float(u0)
    ys[0], us[0] = y, u
    half = 0.5 * h
    for i in range(steps):
        x = xs[i]
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                k1y, k1u = u, f(x, y, u)
                k2y, k2u = u + half * k1u, f(x + half, y + half * k1y, u + half * k1u)
                k3y, k3u = u + half * k2u, f(x + half, y + half * k2y, u + half * k2u)
                k4y, k4u = u + h * k3u, f(x + h, y + h * k3y, u + h * k3u)
                y = float(y + h / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y))
                u = float(u + h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u))
        except OverflowError:
            y = u = math.inf
        if not (math.isfinite(y) and math.isfinite(u)):
            raise BlowUpError(f"RK4 state became non-finite at step {i + 1}", last_valid_step=i)
        ys[i + 1], us[i + 1] = y, u
    return xs, ys, us
