"""Angle wrapping and gauge helpers shared across modules."""
from __future__ import annotations

import numpy as np

TWO_PI = 2.0 * np.pi


def wrap_to_2pi(x):
    """Reduce angles into [0, 2*pi)."""
    return np.mod(np.asarray(x, dtype=float), TWO_PI)


def wrap_to_pi(x):
    """Reduce angle differences into [-pi, pi)."""
    return np.mod(np.asarray(x, dtype=float) + np.pi, TWO_PI) - np.pi


def gauge_fix(theta):
    """Shift so the first oscillator sits at 0 and reduce into [0, 2*pi)."""
    theta = np.asarray(theta, dtype=float)
    return wrap_to_2pi(theta - theta[0])


def gauge_distance(theta_a, theta_b) -> float:
    """Max angular distance between two states modulo a global rotation.

    The optimal rotation is the circular mean of the pointwise differences,
    which is exact for small residuals and harmless otherwise.
    """
    d = wrap_to_pi(np.asarray(theta_a, float) - np.asarray(theta_b, float))
    shift = np.arctan2(np.mean(np.sin(d)), np.mean(np.cos(d)))
    return float(np.max(np.abs(wrap_to_pi(d - shift))))
