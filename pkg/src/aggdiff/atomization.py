"""Equal-mass atomization of an initial density into ordered particles."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import InitialDatum, ModelSpec


class AtomizationError(ValueError):
    pass


@dataclass(frozen=True)
class ParticleState:
    """Time stamp plus N+1 strictly ordered positions pinned to [0, ell].

    Positions are frozen on construction; every consumer may share a state
    across threads.
    """

    time: float
    positions: np.ndarray
    mass: float

    def __post_init__(self) -> None:
        pos = np.ascontiguousarray(self.positions, dtype=float)
        if pos.ndim != 1 or pos.size < 3:
            raise ValueError("need at least three particle positions")
        if pos[0] != 0.0:
            raise ValueError("first particle must sit exactly at 0")
        if np.any(np.diff(pos) <= 0.0):
            raise ValueError("positions must be strictly increasing")
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        pos.flags.writeable = False
        object.__setattr__(self, "positions", pos)

    @property
    def particle_count(self) -> int:
        """N: the number of equal-mass cells (positions are N+1)."""
        return self.positions.size - 1

    @property
    def gaps(self) -> np.ndarray:
        return np.diff(self.positions)


def local_densities(state: ParticleState) -> np.ndarray:
    """Per-cell densities sigma / (N * gap); the cell mass is sigma / N."""
    gaps = state.gaps
    if np.any(gaps <= 0.0):
        raise AtomizationError("state has a nonpositive gap")
    return state.mass / (state.particle_count * gaps)


def atomize(datum: InitialDatum, spec: ModelSpec, particles: int) -> ParticleState:
    """Place N+1 particles so each cell carries mass sigma / N.

    Uses the datum's closed-form quantile when available, otherwise monotone
    bisection on the cumulative to 1e-13 * ell absolute tolerance.  The last
    particle is pinned to ell.
    """
    n = particles
    if n < 2:
        raise ValueError("need at least 2 particles")
    ell = spec.domain_length
    sigma = spec.mass
    total = float(datum.cumulative(np.array([ell]))[0])
    if abs(total - sigma) > 1e-10 * sigma:
        raise AtomizationError(
            f"datum mass {total:.12g} does not match spec mass {sigma:.12g}")

    targets = np.arange(n + 1) * (sigma / n)
    if datum.quantile is not None:
        x = np.asarray(datum.quantile(targets), dtype=float)
    else:
        x = np.empty(n + 1)
        x[0] = 0.0
        lo = 0.0
        for i in range(1, n + 1):
            t = targets[i]
            a, b = lo, ell
            # cumulative is nondecreasing with F(a) <= t <= F(b)
            while b - a > 1e-13 * ell:
                mid = 0.5 * (a + b)
                if float(datum.cumulative(np.array([mid]))[0]) < t:
                    a = mid
                else:
                    b = mid
            x[i] = 0.5 * (a + b)
            lo = a
    x[0] = 0.0
    x[n] = ell

    achieved = datum.cumulative(x)
    if np.any(np.abs(achieved - targets) > 1e-12 * sigma):
        i = int(np.argmax(np.abs(achieved - targets)))
        raise AtomizationError(
            f"cumulative inversion missed the mass level at particle {i}: "
            f"got {achieved[i]:.15g}, wanted {targets[i]:.15g}")
    if np.any(np.diff(x) <= 0.0):
        raise AtomizationError(
            "two particles collapsed; the datum has a zero-density plateau "
            "wider than the inversion tolerance")
    return ParticleState(time=0.0, positions=x, mass=sigma)
