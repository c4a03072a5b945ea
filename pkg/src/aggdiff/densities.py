"""Piecewise-constant densities and the metrics used by the diagnostics.

The quantile (pseudo-inverse) view makes the scaled 1-Wasserstein distance
between two equal-mass piecewise-constant densities an integral of a
piecewise-linear function, which is computed exactly here: every linear
segment is split at its sign change, no quadrature is involved.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .atomization import ParticleState, local_densities

MASS_MATCH_RTOL = 1e-10


@dataclass(frozen=True)
class DiscreteDensity:
    """Cell values over ordered breakpoints; cell masses sum to ``mass``."""

    breakpoints: np.ndarray
    values: np.ndarray
    mass: float

    def __post_init__(self) -> None:
        bp = np.ascontiguousarray(self.breakpoints, dtype=float)
        vals = np.ascontiguousarray(self.values, dtype=float)
        if bp.size != vals.size + 1:
            raise ValueError("need one more breakpoint than cell values")
        if np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if np.any(vals <= 0):
            raise ValueError("cell values must be positive")
        total = float(np.sum(vals * np.diff(bp)))
        if abs(total - self.mass) > 1e-12 * self.mass:
            raise ValueError(f"cell masses sum to {total!r}, declared {self.mass!r}")
        bp.flags.writeable = False
        vals.flags.writeable = False
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    @property
    def cell_count(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class PseudoInverse:
    """Quantile function of a discrete density: piecewise linear in mass,
    slope 1/R_i on the i-th mass cell."""

    mass_breakpoints: np.ndarray
    positions: np.ndarray
    values: np.ndarray  # cell densities, one per mass cell

    def evaluate(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        idx = np.clip(np.searchsorted(self.mass_breakpoints, z, side="right") - 1,
                      0, self.values.size - 1)
        return self.positions[idx] + (z - self.mass_breakpoints[idx]) / self.values[idx]


def reconstruct_density(state: ParticleState) -> DiscreteDensity:
    """The state's piecewise-constant density: value sigma/(N*gap) per cell."""
    return DiscreteDensity(breakpoints=state.positions,
                           values=local_densities(state),
                           mass=state.mass)


def pseudo_inverse(density: DiscreteDensity) -> PseudoInverse:
    widths = np.diff(density.breakpoints)
    z = np.concatenate(([0.0], np.cumsum(density.values * widths)))
    return PseudoInverse(mass_breakpoints=z, positions=density.breakpoints,
                         values=density.values)


def wasserstein1(first: DiscreteDensity, second: DiscreteDensity) -> float:
    """Scaled 1-Wasserstein distance: the exact L1 norm of the difference of
    the two quantile functions over [0, mass]."""
    big = max(first.mass, second.mass)
    if abs(first.mass - second.mass) > MASS_MATCH_RTOL * big:
        raise ValueError("wasserstein1 needs equal masses "
                         f"({first.mass!r} vs {second.mass!r})")
    qa, qb = pseudo_inverse(first), pseudo_inverse(second)
    z = np.union1d(qa.mass_breakpoints, qb.mass_breakpoints)
    z = z[z <= min(first.mass, second.mass) * (1.0 + 1e-15)]
    f = qa.evaluate(z) - qb.evaluate(z)
    fa, fb = f[:-1], f[1:]
    w = np.diff(z)
    same_sign = fa * fb >= 0.0
    trap = 0.5 * (np.abs(fa) + np.abs(fb)) * w
    denom = np.abs(fa) + np.abs(fb)
    crossing = np.where(denom > 0.0,
                        0.5 * w * (fa * fa + fb * fb) / np.where(denom > 0, denom, 1.0),
                        0.0)
    return float(np.sum(np.where(same_sign, trap, crossing)))


def l1_distance(first: DiscreteDensity, second: DiscreteDensity) -> float:
    """Exact L1 distance of two piecewise-constant densities on one interval."""
    span = first.breakpoints[-1] - first.breakpoints[0]
    if (abs(first.breakpoints[0] - second.breakpoints[0]) > 1e-12 * span
            or abs(first.breakpoints[-1] - second.breakpoints[-1]) > 1e-12 * span):
        raise ValueError("densities live on different intervals")
    bp = np.union1d(first.breakpoints, second.breakpoints)
    mids = 0.5 * (bp[:-1] + bp[1:])

    def cell_values(d: DiscreteDensity) -> np.ndarray:
        idx = np.clip(np.searchsorted(d.breakpoints, mids, side="right") - 1,
                      0, d.values.size - 1)
        return d.values[idx]

    return float(np.sum(np.abs(cell_values(first) - cell_values(second)) * np.diff(bp)))


def total_variation(density: DiscreteDensity) -> float:
    """Total variation of the density extended by zero outside its support:
    both boundary values count as jumps."""
    v = density.values
    return float(v[0] + v[-1] + np.sum(np.abs(np.diff(v))))


def min_max(density: DiscreteDensity) -> tuple[float, float]:
    return float(density.values.min()), float(density.values.max())
