"""Model laws for the 1D aggregation-diffusion problem.

A problem instance couples a nondecreasing diffusion function, a
nonincreasing saturating velocity (the nonlinear mobility is
density * velocity), and an attractive interaction kernel, on a mass
sigma supported in [0, ell].  Laws are plain value maps plus declared
constants; admissibility is checked by dense sampling in ``validate``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

Array = np.ndarray
ArrayMap = Callable[[Array], Array]


@dataclass(frozen=True)
class DiffusionLaw:
    """Nondecreasing Lipschitz flux of the local density, zero at zero."""

    evaluate: ArrayMap
    lipschitz_bound: float
    name: str = "custom"


@dataclass(frozen=True)
class VelocityLaw:
    """Nonincreasing crowd-speed factor, zero at and above saturation."""

    evaluate: ArrayMap
    saturation_density: float
    max_speed: float
    name: str = "custom"


@dataclass(frozen=True)
class InteractionKernel:
    """Attractive radial potential with odd, Lipschitz slope.

    ``smoothness_bound`` dominates the Lipschitz constant of the slope and
    the sup of the second and third derivatives on the doubled domain; it
    feeds the gap-bracket constant in the diagnostics.
    ``gaussian_strength`` is set by the Gaussian preset and unlocks the
    compiled pair-sum path; leave it None for custom kernels.
    """

    evaluate: ArrayMap
    derivative: ArrayMap
    smoothness_bound: float
    gaussian_strength: Optional[float] = None
    name: str = "custom"


@dataclass(frozen=True)
class InitialDatum:
    """Initial density with its exact cumulative and declared bounds.

    ``quantile``, when provided, inverts the cumulative in closed form and
    lets atomization skip bisection.  ``lower_bound`` may be zero for data
    that touch vacuum; the validator flags that case instead of refusing it.
    """

    density: ArrayMap
    cumulative: ArrayMap
    length: float
    lower_bound: float
    upper_bound: float
    total_variation_bound: float
    quantile: Optional[Callable[[Array], Array]] = None
    name: str = "custom"

    @property
    def mass(self) -> float:
        return float(self.cumulative(np.array([self.length]))[0])


@dataclass(frozen=True)
class ModelSpec:
    diffusion: DiffusionLaw
    velocity: VelocityLaw
    kernel: InteractionKernel
    domain_length: float
    mass: float

    def __post_init__(self) -> None:
        if self.domain_length <= 0:
            raise ValueError("domain_length must be positive")
        if self.mass <= 0:
            raise ValueError("mass must be positive")


def make_spec(diffusion: DiffusionLaw, velocity: VelocityLaw,
              kernel: InteractionKernel, datum: InitialDatum) -> ModelSpec:
    """Assemble a ModelSpec taking domain length and total mass from the datum."""
    return ModelSpec(diffusion=diffusion, velocity=velocity, kernel=kernel,
                     domain_length=datum.length, mass=datum.mass)


# ----------------------------------------------------------------------
# Diffusion presets
# ----------------------------------------------------------------------

def porous_medium_diffusion(epsilon: float, density_cap: float = 2.0) -> DiffusionLaw:
    """Quadratic (porous-medium type) diffusion (epsilon/2) * rho^2.

    The declared Lipschitz constant is valid on [0, density_cap].
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")

    def evaluate(rho: Array) -> Array:
        rho = np.asarray(rho, dtype=float)
        return 0.5 * epsilon * rho * rho

    return DiffusionLaw(evaluate=evaluate, lipschitz_bound=epsilon * density_cap,
                        name="porous_medium")


def two_point_diffusion(epsilon: float, exponent: float = 2.0) -> DiffusionLaw:
    """Diffusion with vanishing slope at both 0 and 1.

    (epsilon/m) rho^m - (epsilon/(m+1)) rho^(m+1) on [0, 1]; held constant
    above 1 so the law stays nondecreasing on the whole half-line (the
    mobility never lets densities cross 1 anyway).
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if exponent < 2:
        raise ValueError("exponent must be at least 2")
    m = exponent
    plateau = epsilon * (1.0 / m - 1.0 / (m + 1.0))
    # slope eps * r^(m-1) (1 - r) peaks at r = (m-1)/m
    rstar = (m - 1.0) / m
    lip = epsilon * rstar ** (m - 1.0) * (1.0 - rstar)

    def evaluate(rho: Array) -> Array:
        rho = np.asarray(rho, dtype=float)
        r = np.minimum(rho, 1.0)
        return (epsilon / m) * r ** m - (epsilon / (m + 1.0)) * r ** (m + 1.0)

    _ = plateau  # value reached at rho >= 1, kept for readability
    return DiffusionLaw(evaluate=evaluate, lipschitz_bound=lip, name="two_point")


def strongly_degenerate_diffusion(epsilon: float, density_cap: float = 2.0) -> DiffusionLaw:
    """Three-branch diffusion whose slope vanishes on the band [2/5, 3/5].

    Quadratic below the band, constant 2*epsilon/25 on it, quadratic again
    above; continuous at both breakpoints, ties resolved to the branch
    closed on the left.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    lo, hi = 0.4, 0.6
    flat = 2.0 * epsilon / 25.0

    def evaluate(rho: Array) -> Array:
        rho = np.asarray(rho, dtype=float)
        return np.where(rho < lo, 0.5 * epsilon * rho * rho,
                        np.where(rho < hi, flat,
                                 flat + 0.5 * epsilon * (rho - hi) ** 2))

    lip = epsilon * max(lo, density_cap - hi)
    return DiffusionLaw(evaluate=evaluate, lipschitz_bound=lip,
                        name="strongly_degenerate")


# ----------------------------------------------------------------------
# Velocity and kernel presets
# ----------------------------------------------------------------------

def saturating_velocity(max_density: float) -> VelocityLaw:
    """Linear congestion law max(0, 1 - rho/max_density), unit free speed."""
    if max_density <= 0:
        raise ValueError("max_density must be positive")

    def evaluate(rho: Array) -> Array:
        rho = np.asarray(rho, dtype=float)
        return np.maximum(0.0, 1.0 - rho / max_density)

    return VelocityLaw(evaluate=evaluate, saturation_density=max_density,
                       max_speed=1.0, name="saturating")


def gaussian_kernel(strength: float, domain_length: float = 1.0) -> InteractionKernel:
    """Attractive Gaussian well strength * (1 - exp(-x^2)).

    The smoothness bound is measured numerically on [-2L, 2L] from the
    closed-form second and third derivatives, inflated by 5%.
    """
    if strength <= 0:
        raise ValueError("strength must be positive")
    if domain_length <= 0:
        raise ValueError("domain_length must be positive")

    def evaluate(x: Array) -> Array:
        x = np.asarray(x, dtype=float)
        return strength * (1.0 - np.exp(-x * x))

    def derivative(x: Array) -> Array:
        x = np.asarray(x, dtype=float)
        return 2.0 * strength * x * np.exp(-x * x)

    grid = np.linspace(-2.0 * domain_length, 2.0 * domain_length, 10_000)
    e = np.exp(-grid * grid)
    second = 2.0 * strength * e * (1.0 - 2.0 * grid * grid)
    third = 4.0 * strength * e * grid * (2.0 * grid * grid - 3.0)
    bound = 1.05 * max(np.abs(second).max(), np.abs(third).max())

    return InteractionKernel(evaluate=evaluate, derivative=derivative,
                             smoothness_bound=float(bound),
                             gaussian_strength=strength, name="gaussian")


# ----------------------------------------------------------------------
# Initial data presets
# ----------------------------------------------------------------------

def constant_datum(value: float, length: float = 1.0) -> InitialDatum:
    if value <= 0 or length <= 0:
        raise ValueError("value and length must be positive")

    def density(x: Array) -> Array:
        return np.full_like(np.asarray(x, dtype=float), value)

    def cumulative(x: Array) -> Array:
        return value * np.asarray(x, dtype=float)

    def quantile(mass: Array) -> Array:
        return np.asarray(mass, dtype=float) / value

    return InitialDatum(density=density, cumulative=cumulative, length=length,
                        lower_bound=value, upper_bound=value,
                        total_variation_bound=2.0 * value, quantile=quantile,
                        name="constant")


def two_step_datum(left: float, right: float, split: float,
                   length: float = 1.0) -> InitialDatum:
    """Two plateaus: ``left`` on [0, split), ``right`` on [split, length]."""
    if left <= 0 or right <= 0:
        raise ValueError("plateau values must be positive")
    if not 0.0 < split < length:
        raise ValueError("split must lie strictly inside the domain")
    mass_left = left * split

    def density(x: Array) -> Array:
        x = np.asarray(x, dtype=float)
        return np.where(x < split, left, right)

    def cumulative(x: Array) -> Array:
        x = np.asarray(x, dtype=float)
        return np.where(x < split, left * x, mass_left + right * (x - split))

    def quantile(mass: Array) -> Array:
        mass = np.asarray(mass, dtype=float)
        return np.where(mass <= mass_left, mass / left,
                        split + (mass - mass_left) / right)

    tv = left + right + abs(left - right)
    return InitialDatum(density=density, cumulative=cumulative, length=length,
                        lower_bound=min(left, right), upper_bound=max(left, right),
                        total_variation_bound=tv, quantile=quantile,
                        name="two_step")


def oscillating_datum() -> InitialDatum:
    """(cos(4 pi x) + 1) / 2 on [0, 2]; touches zero, so the positive
    lower bound required by the scheme's analysis fails (flagged by the
    validator, run best-effort by the integrator)."""
    four_pi = 4.0 * math.pi

    def density(x: Array) -> Array:
        x = np.asarray(x, dtype=float)
        return 0.5 * (np.cos(four_pi * x) + 1.0)

    def cumulative(x: Array) -> Array:
        x = np.asarray(x, dtype=float)
        return 0.5 * (x + np.sin(four_pi * x) / four_pi)

    # four full oscillations between 0 and 1, plus the two boundary jumps
    return InitialDatum(density=density, cumulative=cumulative, length=2.0,
                        lower_bound=0.0, upper_bound=1.0,
                        total_variation_bound=10.0, name="oscillating")


# ----------------------------------------------------------------------
# Admissibility validation
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class ValidationIssue:
    check: str
    message: str


@dataclass
class ValidationReport:
    issues: list[ValidationIssue] = field(default_factory=list)

    def flag(self, check: str, message: str) -> None:
        self.issues.append(ValidationIssue(check, message))

    @property
    def ok(self) -> bool:
        return not self.issues

    def __str__(self) -> str:
        if self.ok:
            return "admissible at the sampled resolution"
        return "\n".join(f"[{i.check}] {i.message}" for i in self.issues)


def validate(spec: ModelSpec, datum: InitialDatum, grid_points: int = 1000) -> ValidationReport:
    """Sample every hypothesis on the laws and the datum; violations become
    report entries, never exceptions."""
    if grid_points < 2:
        raise ValueError("grid_points must be at least 2")
    report = ValidationReport()
    ell = spec.domain_length

    hi = 2.0 * max(datum.upper_bound, 1e-12)
    rho = np.linspace(0.0, hi, grid_points)
    phi = spec.diffusion.evaluate(rho)
    if abs(float(spec.diffusion.evaluate(np.array([0.0]))[0])) > 0.0:
        report.flag("diffusion.zero", "diffusion does not vanish at zero density")
    dphi = np.diff(phi)
    if np.any(dphi < -1e-14 * max(1.0, np.abs(phi).max())):
        i = int(np.argmin(dphi))
        report.flag("diffusion.monotone",
                    f"diffusion decreases near density {rho[i]:.6g}")
    slack = 1e-12 * max(1.0, np.abs(phi).max())
    over = np.abs(dphi) - spec.diffusion.lipschitz_bound * np.diff(rho)
    if np.any(over > slack):
        i = int(np.argmax(over))
        report.flag("diffusion.lipschitz",
                    f"declared Lipschitz bound violated near density {rho[i]:.6g}")

    vhi = 2.0 * spec.velocity.saturation_density
    rho_v = np.linspace(0.0, vhi, grid_points)
    vel = spec.velocity.evaluate(rho_v)
    if np.any(np.diff(vel) > 1e-14 * max(1.0, np.abs(vel).max())):
        report.flag("velocity.monotone", "velocity increases somewhere")
    sat = vel[rho_v >= spec.velocity.saturation_density]
    if sat.size and np.any(sat != 0.0):
        report.flag("velocity.saturation",
                    "velocity nonzero at or above the saturation density")
    if np.any(vel < 0.0):
        report.flag("velocity.sign", "velocity takes negative values")
    v0 = float(spec.velocity.evaluate(np.array([0.0]))[0])
    if not (abs(v0 - spec.velocity.max_speed) <= 1e-12 * max(1.0, spec.velocity.max_speed)):
        report.flag("velocity.max_speed", "declared max speed differs from v(0)")

    x = np.linspace(-2.0 * ell, 2.0 * ell, grid_points)
    kp = spec.kernel.derivative(x)
    kp_neg = spec.kernel.derivative(-x)
    if np.any(np.abs(kp + kp_neg) > 1e-12 * max(1.0, np.abs(kp).max())):
        report.flag("kernel.odd", "kernel slope is not odd")
    if abs(float(spec.kernel.derivative(np.array([0.0]))[0])) > 0.0:
        report.flag("kernel.origin", "kernel slope nonzero at the origin")
    pos = x[x > 0]
    if np.any(spec.kernel.derivative(pos) <= 0.0):
        report.flag("kernel.attractive", "kernel slope not positive on x > 0")
    lover = np.abs(np.diff(kp)) - spec.kernel.smoothness_bound * np.diff(x)
    if np.any(lover > 1e-12 * max(1.0, np.abs(kp).max())):
        report.flag("kernel.lipschitz", "kernel slope exceeds declared Lipschitz bound")

    xs = np.linspace(0.0, ell, grid_points)
    rho_bar = datum.density(xs)
    if datum.lower_bound <= 0.0:
        report.flag("datum.positive_floor",
                    "datum lower bound is not strictly positive; the gap "
                    "bracket has no proof for this datum")
    tol = 1e-12 * max(1.0, datum.upper_bound)
    if np.any(rho_bar < datum.lower_bound - tol) or np.any(rho_bar > datum.upper_bound + tol):
        report.flag("datum.bounds", "datum leaves its declared [m, M] range")
    cum = datum.cumulative(xs)
    if abs(float(cum[0])) > 1e-14 * spec.mass:
        report.flag("datum.cumulative_origin", "cumulative mass nonzero at x = 0")
    if abs(float(cum[-1]) - spec.mass) > 1e-10 * spec.mass:
        report.flag("datum.total_mass",
                    f"cumulative({ell}) = {cum[-1]:.12g} but spec mass is {spec.mass:.12g}")
    if np.any(np.diff(cum) < -1e-14 * spec.mass):
        report.flag("datum.cumulative_monotone", "cumulative mass decreases")

    return report
