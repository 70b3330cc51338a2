"""Smooth one-dimensional profiles: the tube cutoff and the radial bump.

Every function takes an array module ``xp`` (numpy by default) so the same
formulas can be traced by jax when higher derivatives are needed.
"""

from __future__ import annotations

import numpy as np

DEFAULT_WIDTH = 1.0


def _g(u, xp=np):
    # exp(-1/u) for u > 0, 0 otherwise; the inner where keeps the untaken branch finite
    pos = u > 0
    safe = xp.where(pos, u, 1.0)
    return xp.where(pos, xp.exp(-1.0 / safe), 0.0)


def _dg(u, xp=np):
    pos = u > 0
    safe = xp.where(pos, u, 1.0)
    return xp.where(pos, xp.exp(-1.0 / safe) / safe**2, 0.0)


def smooth_step(u, xp=np):
    """0 for u <= 0, 1 for u >= 1, smooth and monotone in between."""
    a = _g(u, xp)
    b = _g(1.0 - u, xp)
    return a / (a + b)


def smooth_step_deriv(u, xp=np):
    a, b = _g(u, xp), _g(1.0 - u, xp)
    da, db = _dg(u, xp), -_dg(1.0 - u, xp)
    return (da * b - a * db) / (a + b) ** 2


def cutoff(t, width: float = DEFAULT_WIDTH, xp=np):
    """phi(t): 1 on t <= 1, 0 on t >= 1 + width, decreasing in between."""
    return smooth_step((1.0 + width - t) / width, xp)


def cutoff_deriv(t, width: float = DEFAULT_WIDTH, xp=np):
    return -smooth_step_deriv((1.0 + width - t) / width, xp) / width


def bump_q(q, xp=np):
    """Radial bump as a function of q = r^2: exp(1 - 1/(1-q)) on q < 1, else 0.

    Normalized so that the value at the center is 1.
    """
    inside = q < 1.0
    safe = xp.where(inside, q, 0.0)
    return xp.where(inside, xp.exp(1.0 - 1.0 / (1.0 - safe)), 0.0)


def bump_q_deriv(q, xp=np):
    inside = q < 1.0
    safe = xp.where(inside, q, 0.0)
    return xp.where(inside, -xp.exp(1.0 - 1.0 / (1.0 - safe)) / (1.0 - safe) ** 2, 0.0)
