"""Deterministic follow-the-leader particle scheme for one-dimensional
aggregation-diffusion equations with nonlinear mobility."""

from .atomization import AtomizationError, ParticleState, atomize, local_densities
from .config import ConfigError, RunConfig, parse_config, render_manifest
from .densities import (DiscreteDensity, PseudoInverse, l1_distance, min_max,
                        pseudo_inverse, reconstruct_density, total_variation,
                        wasserstein1)
from .diagnostics import (ConvergenceTable, DiagnosticsReport, MinMaxEnvelope,
                          TVEnvelope, TestFunction, check_minmax,
                          effective_upper_density, make_test_functions,
                          run_diagnostics, self_convergence, tv_envelope,
                          w1_time_lipschitz, weak_residual, weak_residuals)
from .dynamics import (VelocityField, assemble_velocity, density_rate,
                       pair_sums, velocity_parts)
from .integrator import (IntegrationError, IntegratorConfig, StepLog,
                         StepRejected, Trajectory, integrate, step_once)
from .model import (DiffusionLaw, InitialDatum, InteractionKernel, ModelSpec,
                    ValidationReport, VelocityLaw, constant_datum,
                    gaussian_kernel, make_spec, oscillating_datum,
                    porous_medium_diffusion, saturating_velocity,
                    strongly_degenerate_diffusion, two_point_diffusion,
                    two_step_datum, validate)

__version__ = "0.1.0"

__all__ = [
    "AtomizationError", "ConfigError", "ConvergenceTable", "DiagnosticsReport",
    "DiffusionLaw", "DiscreteDensity", "InitialDatum", "IntegrationError",
    "IntegratorConfig", "InteractionKernel", "MinMaxEnvelope", "ModelSpec",
    "ParticleState", "PseudoInverse", "RunConfig", "StepLog", "StepRejected",
    "TVEnvelope", "TestFunction", "Trajectory", "ValidationReport",
    "VelocityField", "VelocityLaw", "assemble_velocity", "atomize",
    "check_minmax", "constant_datum", "density_rate", "effective_upper_density",
    "gaussian_kernel", "integrate", "l1_distance", "local_densities",
    "make_spec", "make_test_functions", "min_max", "oscillating_datum",
    "pair_sums", "parse_config", "porous_medium_diffusion", "pseudo_inverse",
    "reconstruct_density", "render_manifest", "run_diagnostics",
    "saturating_velocity", "self_convergence", "step_once",
    "strongly_degenerate_diffusion", "total_variation", "tv_envelope",
    "two_point_diffusion", "two_step_datum", "validate", "velocity_parts",
    "w1_time_lipschitz", "wasserstein1", "weak_residual", "weak_residuals",
]
