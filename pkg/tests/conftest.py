"""Shared builders and a cross-test cache for expensive trajectories."""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pytest

from aggdiff import (InitialDatum, IntegratorConfig, ModelSpec, Trajectory,
                     atomize, constant_datum, gaussian_kernel, integrate,
                     make_spec, oscillating_datum, porous_medium_diffusion,
                     saturating_velocity, strongly_degenerate_diffusion,
                     two_point_diffusion, two_step_datum)


@dataclass(frozen=True)
class Case:
    """Hashable description of one simulation run."""
    diffusion: str                       # pm | tp | sd
    epsilon: float
    kernel_strength: float
    datum: tuple                         # ("constant", value, length) etc.
    particles: int
    t_final: float = 1.0
    abs_tolerance: float = 1e-8
    snapshots: int = 101


@dataclass(frozen=True)
class RunOutput:
    trajectory: Trajectory
    spec: ModelSpec
    datum: InitialDatum
    elapsed: float


def build_datum(key: tuple) -> InitialDatum:
    kind = key[0]
    if kind == "constant":
        return constant_datum(key[1], key[2])
    if kind == "two_step":
        return two_step_datum(key[1], key[2], key[3], key[4])
    if kind == "oscillating":
        return oscillating_datum()
    raise ValueError(kind)


def build_spec(case: Case, datum: InitialDatum) -> ModelSpec:
    if case.diffusion == "pm":
        diff = porous_medium_diffusion(case.epsilon)
    elif case.diffusion == "tp":
        diff = two_point_diffusion(case.epsilon)
    elif case.diffusion == "sd":
        diff = strongly_degenerate_diffusion(case.epsilon)
    else:
        raise ValueError(case.diffusion)
    return make_spec(diff, saturating_velocity(1.0),
                     gaussian_kernel(case.kernel_strength, domain_length=datum.length),
                     datum)


_RUNS: dict[Case, RunOutput] = {}


def run_case(case: Case) -> RunOutput:
    """Integrate one case, caching the result for the whole session.

    max_step is pinned to T/100: the library's default cap is a stability
    guard several times below the controller's natural step and would make
    the large acceptance runs needlessly slow.
    """
    if case in _RUNS:
        return _RUNS[case]
    datum = build_datum(case.datum)
    spec = build_spec(case, datum)
    state = atomize(datum, spec, case.particles)
    cfg = IntegratorConfig(
        t_final=case.t_final,
        abs_tolerance=case.abs_tolerance,
        max_step=case.t_final / 100.0,
        snapshot_times=tuple(np.linspace(0.0, case.t_final, case.snapshots)),
        gap_floor=spec.mass / (2.0 * datum.upper_bound * case.particles),
    )
    start = time.perf_counter()
    traj = integrate(state, spec, cfg)
    out = RunOutput(trajectory=traj, spec=spec, datum=datum,
                    elapsed=time.perf_counter() - start)
    _RUNS[case] = out
    return out


UNIFORM_07 = ("constant", 0.7, 1.0)
STRONG_TWO_STEP = ("two_step", 0.8, 0.5, 0.5, 1.0)
# asymmetric datum with total mass exactly 1: the analysis' normalization,
# under which the weak-form identity carries no mass weights
UNIT_MASS_TWO_STEP = ("two_step", 0.7, 0.3, 1.0, 2.0)


@pytest.fixture(scope="session")
def cases():
    return run_case
