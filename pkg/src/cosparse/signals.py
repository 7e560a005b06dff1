"""Named test signals. All index ranges are half-open: [a, b)."""

from __future__ import annotations

import numpy as np


def boxcar(n, eta):
    """Centered boxcar covering indices [floor(n/2 - eta n), floor(n/2 + eta n))."""
    n = int(n)
    if not 0.0 < eta <= 0.5:
        raise ValueError("eta must lie in (0, 1/2]")
    lo = int(np.floor(n / 2 - eta * n))
    hi = int(np.floor(n / 2 + eta * n))
    x = np.zeros(n)
    x[lo:hi] = 1.0
    return x


def two_boxcar(n, eta, rho):
    """Two unit boxcars of width ~eta*n separated by ~2*rho*n around the center."""
    n = int(n)
    x = np.zeros(n)
    a1 = int(np.floor((0.5 - eta - rho) * n))
    b1 = int(np.floor((0.5 - rho) * n))
    a2 = int(np.floor((0.5 + rho) * n))
    b2 = int(np.floor((0.5 + eta + rho) * n))
    if not (0 <= a1 < b1 <= a2 < b2 <= n):
        raise ValueError("boxcars collapse or overlap for these parameters")
    x[a1:b1] = 1.0
    x[a2:b2] = 1.0
    return x


def staircase(n):
    """Four equal blocks: -1 on the first quarter, +1 on the last, 0 between."""
    n = int(n)
    if n % 4 != 0:
        raise ValueError("n must be a multiple of 4")
    m = n // 4
    x = np.zeros(n)
    x[:m] = -1.0
    x[3 * m:] = 1.0
    return x


def staircase_perturbation(n, epsilon):
    """Block perturbation epsilon * (1 on third quarter - 1 on second quarter)."""
    n = int(n)
    if n % 4 != 0:
        raise ValueError("n must be a multiple of 4")
    m = n // 4
    w = np.zeros(n)
    w[m:2 * m] = -float(epsilon)
    w[2 * m:3 * m] = float(epsilon)
    return w
