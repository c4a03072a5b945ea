"""Independent reference implementations used as test oracles.

Everything here is deliberately written term by term in plain Python with
math.exp, sharing no code with the package's vectorized or compiled paths.
"""
from __future__ import annotations

import math

import numpy as np


def reference_velocity(positions, mass, phi, vel, kernel_slope):
    """Naive double-loop evaluation of the particle velocities.

    ``phi``, ``vel`` and ``kernel_slope`` are scalar callables.  Interior
    particle i gets the diffusive difference plus the two one-sided kernel
    sums weighted by the velocities of the adjacent cells; both endpoint
    particles stay put.
    """
    x = list(map(float, positions))
    n = len(x) - 1
    dens = [mass / (n * (x[i + 1] - x[i])) for i in range(n)]
    out = [0.0] * (n + 1)
    for i in range(1, n):
        diffusive = n * (phi(dens[i - 1]) - phi(dens[i]))
        ahead = 0.0
        for j in range(i + 1, n + 1):
            ahead += kernel_slope(x[i] - x[j])
        behind = 0.0
        for j in range(0, i):
            behind += kernel_slope(x[i] - x[j])
        out[i] = diffusive - vel(dens[i]) / n * ahead - vel(dens[i - 1]) / n * behind
    return np.array(out)


def scalar_porous_medium(epsilon):
    return lambda r: 0.5 * epsilon * r * r


def scalar_saturating(max_density):
    return lambda r: max(0.0, 1.0 - r / max_density)


def scalar_gaussian_slope(strength):
    return lambda d: 2.0 * strength * d * math.exp(-d * d)


def brute_force_wasserstein(first, second, points: int = 1_000_000) -> float:
    """Rectangle-rule distance on a fine uniform quantile grid.

    Each quantile is obtained by inverting the piecewise-linear cumulative
    mass with np.interp, a route independent of the package's segmentwise
    pseudo-inverse construction.
    """
    mass = first.mass
    z = (np.arange(points) + 0.5) * (mass / points)

    def quantiles(density):
        cum = np.concatenate(([0.0], np.cumsum(density.values * np.diff(density.breakpoints))))
        return np.interp(z, cum, density.breakpoints)

    return float(np.mean(np.abs(quantiles(first) - quantiles(second))) * mass)
