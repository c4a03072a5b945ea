"""Right-hand side of the particle system: diffusive + nonlocal velocities.

Interior particle i moves with

    N * (phi(R_{i-1}) - phi(R_i))
    - v(R_i)/N * sum_{j>i} K'(x_i - x_j)
    - v(R_{i-1})/N * sum_{j<i} K'(x_i - x_j)

with both endpoint particles pinned.  The pairwise sums run through a
compiled single-pass kernel when the interaction is a Gaussian preset;
any other kernel falls back to a dense numpy evaluation.  Both paths
use fixed reduction orders, so repeated evaluation is bitwise stable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .atomization import ParticleState, local_densities
from .model import ModelSpec

try:
    from . import _pairsums
except ImportError:  # pragma: no cover - build without the extension
    _pairsums = None


@dataclass(frozen=True)
class VelocityField:
    total: np.ndarray
    diffusive_part: np.ndarray
    nonlocal_part: np.ndarray


def pair_sums(x: np.ndarray, spec: ModelSpec, ahead: np.ndarray,
              behind: np.ndarray, compensated: bool = False) -> None:
    """Fill ahead[i] = sum_{j>i} K'(x_i - x_j) and behind[i] = sum_{j<i}.

    ``compensated`` switches to exactly rounded summation (math.fsum); it
    is meant for very large particle counts and is much slower.
    """
    kernel = spec.kernel
    if compensated or kernel.gaussian_strength is None or _pairsums is None:
        diff = x[:, None] - x[None, :]
        slopes = np.asarray(kernel.derivative(diff), dtype=float)
        if compensated:
            n1 = x.size
            for i in range(n1):
                ahead[i] = math.fsum(slopes[i, i + 1:])
                behind[i] = math.fsum(slopes[i, :i])
        else:
            np.sum(np.triu(slopes, k=1), axis=1, out=ahead)
            np.sum(np.tril(slopes, k=-1), axis=1, out=behind)
    else:
        _pairsums.gaussian_pair_sums(x, 2.0 * kernel.gaussian_strength, ahead, behind)


def velocity_parts(x: np.ndarray, mass: float, spec: ModelSpec,
                   compensated: bool = False) -> VelocityField:
    """Velocity field for raw ordered positions (no boundary pinning assumed);
    the nonlocal part depends on position differences only."""
    x = np.ascontiguousarray(x, dtype=float)
    n = x.size - 1
    gaps = np.diff(x)
    if np.any(gaps <= 0.0):
        raise ValueError("positions must be strictly increasing")
    dens = mass / (n * gaps)
    phi = np.asarray(spec.diffusion.evaluate(dens), dtype=float)
    vel = np.asarray(spec.velocity.evaluate(dens), dtype=float)
    _check_finite(phi, "diffusion")
    _check_finite(vel, "velocity")

    ahead = np.empty(n + 1)
    behind = np.empty(n + 1)
    pair_sums(x, spec, ahead, behind, compensated=compensated)
    _check_finite(ahead, "kernel")
    _check_finite(behind, "kernel")

    diffusive = np.zeros(n + 1)
    nonlocal_ = np.zeros(n + 1)
    diffusive[1:-1] = n * (phi[:-1] - phi[1:])
    nonlocal_[1:-1] = -(vel[1:] / n) * ahead[1:-1] - (vel[:-1] / n) * behind[1:-1]
    total = diffusive + nonlocal_
    total[0] = 0.0
    total[-1] = 0.0
    return VelocityField(total=total, diffusive_part=diffusive,
                         nonlocal_part=nonlocal_)


def assemble_velocity(state: ParticleState, spec: ModelSpec,
                      compensated: bool = False) -> VelocityField:
    """Evaluate the full velocity field of a state, split into parts."""
    return velocity_parts(state.positions, state.mass, spec,
                          compensated=compensated)


def density_rate(state: ParticleState, field: VelocityField) -> np.ndarray:
    """Rate of change of each cell density: -N R_i^2 (xdot_{i+1} - xdot_i).

    An expanding gap therefore yields a negative rate.
    """
    if field.total.size != state.positions.size:
        raise ValueError("velocity field length does not match the state")
    dens = local_densities(state)
    n = state.particle_count
    return -n * dens * dens * np.diff(field.total)


def _check_finite(values: np.ndarray, label: str) -> None:
    if not np.all(np.isfinite(values)):
        idx = int(np.flatnonzero(~np.isfinite(values))[0])
        raise FloatingPointError(f"{label} evaluation produced a non-finite "
                                 f"value at index {idx}")


class RhsWorkspace:
    """Preallocated buffers for repeated velocity evaluation on one system.

    The integrator calls ``fill`` tens of thousands of times per run; this
    avoids reallocating the pairwise sum outputs at every stage.
    """

    def __init__(self, particles: int, spec: ModelSpec, mass: float):
        self.spec = spec
        self.n = particles
        self.mass = mass
        self.ahead = np.empty(particles + 1)
        self.behind = np.empty(particles + 1)

    def fill(self, x: np.ndarray, out: np.ndarray) -> np.ndarray:
        n = self.n
        spec = self.spec
        dens = self.mass / (n * np.diff(x))
        phi = spec.diffusion.evaluate(dens)
        vel = spec.velocity.evaluate(dens)
        pair_sums(x, spec, self.ahead, self.behind)
        out[0] = 0.0
        out[-1] = 0.0
        out[1:-1] = (n * (phi[:-1] - phi[1:])
                     - (vel[1:] / n) * self.ahead[1:-1]
                     - (vel[:-1] / n) * self.behind[1:-1])
        return out
