"""Adaptive explicit time stepping for the particle system.

Dormand-Prince 5(4) embedded pair with PI step-size control.  Beyond the
usual local-error test, a trial step is rejected outright whenever any
inter-particle gap falls below a safety floor (half the proven lower
bound); that guard keeps the discrete state inside the regime where the
scheme's estimates hold, and turns an impending particle collision into
a controlled step-size collapse instead of a corrupted state.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .atomization import ParticleState
from .dynamics import RhsWorkspace
from .model import ModelSpec

# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = (9017 / 3168, -355 / 33, 46732 / 5247,
                                49 / 176, -5103 / 18656)
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# fifth-order minus embedded fourth-order weights
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

_PI_ALPHA = 0.17
_PI_BETA = 0.04
_MAX_GROWTH = 5.0
_MIN_SHRINK = 0.2


class IntegrationError(RuntimeError):
    def __init__(self, message: str, time: float, min_gap: float,
                 partial: Optional[list[ParticleState]] = None):
        super().__init__(f"{message} (t = {time:.12g}, smallest gap = {min_gap:.6g})")
        self.time = time
        self.min_gap = min_gap
        self.partial = partial if partial is not None else []


@dataclass(frozen=True)
class IntegratorConfig:
    t_final: float
    abs_tolerance: float = 1e-8
    safety_factor: float = 0.8
    max_step: Optional[float] = None
    min_step: Optional[float] = None
    snapshot_times: Optional[Sequence[float]] = None
    gap_floor: Optional[float] = None

    def __post_init__(self) -> None:
        if self.t_final <= 0:
            raise ValueError("t_final must be positive")
        if self.abs_tolerance <= 0:
            raise ValueError("abs_tolerance must be positive")
        if not 0.0 < self.safety_factor <= 1.0:
            raise ValueError("safety_factor must lie in (0, 1]")
        if self.max_step is not None and not 0.0 < self.max_step <= self.t_final:
            raise ValueError("max_step must lie in (0, t_final]")
        if self.min_step is not None and self.min_step <= 0:
            raise ValueError("min_step must be positive")
        if (self.min_step is not None and self.max_step is not None
                and self.min_step > self.max_step):
            raise ValueError("min_step must not exceed max_step")
        if self.snapshot_times is not None:
            times = np.asarray(self.snapshot_times, dtype=float)
            if times.size:
                if np.any(np.diff(times) <= 0):
                    raise ValueError("snapshot times must be strictly increasing")
                if times[0] < 0.0 or times[-1] > self.t_final:
                    raise ValueError("snapshot times must lie in [0, t_final]")

    def resolved_min_step(self) -> float:
        return self.min_step if self.min_step is not None else 1e-12 * self.t_final

    def resolved_snapshots(self, t_start: float) -> np.ndarray:
        if self.snapshot_times is None:
            return np.linspace(t_start, self.t_final, 101)
        times = np.asarray(self.snapshot_times, dtype=float)
        if times.size == 0:
            return times
        if np.any(np.diff(times) <= 0):
            raise ValueError("snapshot times must be strictly increasing")
        if times[0] < t_start or times[-1] > self.t_final:
            raise ValueError("snapshot times must lie in [t_start, t_final]")
        return times


@dataclass
class StepLog:
    accepted: int = 0
    rejected_error: int = 0
    rejected_gap: int = 0
    accepted_sizes: list[float] = field(default_factory=list)
    smallest_gap_seen: float = np.inf

    @property
    def rejected(self) -> int:
        return self.rejected_error + self.rejected_gap


@dataclass(frozen=True)
class Trajectory:
    snapshots: list[ParticleState]
    step_log: StepLog

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.snapshots])


@dataclass(frozen=True)
class StepRejected:
    error_estimate: float
    min_gap: float
    reason: str


def default_max_step(state: ParticleState, spec: ModelSpec, t_final: float) -> float:
    """Conservative cap: min(T/100, quarter of min-gap^2 over the diffusion
    Lipschitz constant).  The diffusive stiffness scales with gap^-2, so the
    quadratic term keeps naive runs stable; tuned runs may override it."""
    cap = t_final / 100.0
    lip = spec.diffusion.lipschitz_bound
    if lip > 0.0:
        g = float(np.min(state.gaps))
        cap = min(cap, 0.25 * g * g / lip)
    return cap


class _Stepper:
    def __init__(self, state: ParticleState, spec: ModelSpec):
        n1 = state.positions.size
        self.work = RhsWorkspace(state.particle_count, spec, state.mass)
        self.k = [np.empty(n1) for _ in range(7)]
        self.right_end = float(state.positions[-1])

    def stages(self, x: np.ndarray, dt: float) -> np.ndarray:
        """Six new evaluations (k1 assumed filled: FSAL); returns x at t+dt."""
        k1, k2, k3, k4, k5, k6, k7 = self.k
        f = self.work.fill
        f(x + dt * (_A21 * k1), k2)
        f(x + dt * (_A31 * k1 + _A32 * k2), k3)
        f(x + dt * (_A41 * k1 + _A42 * k2 + _A43 * k3), k4)
        f(x + dt * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4), k5)
        f(x + dt * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5), k6)
        x_new = x + dt * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
        x_new[0] = 0.0
        x_new[-1] = self.right_end
        f(x_new, k7)
        return x_new

    def error_estimate(self, dt: float) -> float:
        k = self.k
        acc = _E[0] * k[0]
        for w, ks in zip(_E[2:], k[2:]):
            acc = acc + w * ks
        return float(np.abs(dt * acc).max())

    def interpolate(self, x0: np.ndarray, x1: np.ndarray, dt: float,
                    theta: float) -> np.ndarray:
        """Cubic Hermite between accepted endpoints (derivatives are free:
        k1 at the left end, k7 = FSAL at the right)."""
        f0, f1 = self.k[0], self.k[6]
        delta = x1 - x0
        out = (x0 + theta * (dt * f0)
               + (theta * theta) * (3.0 * delta - dt * (2.0 * f0 + f1))
               + (theta * theta * theta) * (dt * (f0 + f1) - 2.0 * delta))
        out[0] = 0.0
        out[-1] = self.right_end
        return out


def step_once(state: ParticleState, spec: ModelSpec, dt: float,
              abs_tolerance: Optional[float] = None,
              gap_floor: Optional[float] = None
              ) -> Union[ParticleState, StepRejected]:
    """Take a single trial step of size dt.

    Returns the advanced state, or a StepRejected carrying the embedded
    error estimate and the smallest gap the trial produced.  When
    ``abs_tolerance`` is given the local-error test applies too.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    stepper = _Stepper(state, spec)
    floor = gap_floor if gap_floor is not None else 0.5 * float(np.min(state.gaps))
    x = np.array(state.positions)
    stepper.work.fill(x, stepper.k[0])
    x_new = stepper.stages(x, dt)
    min_gap = float(np.min(np.diff(x_new)))
    err = stepper.error_estimate(dt)
    if not np.isfinite(err) or not np.isfinite(min_gap):
        raise IntegrationError("non-finite right-hand side", state.time, min_gap)
    if min_gap <= floor:
        return StepRejected(error_estimate=err, min_gap=min_gap, reason="gap")
    if abs_tolerance is not None and err > abs_tolerance:
        return StepRejected(error_estimate=err, min_gap=min_gap, reason="error")
    return ParticleState(time=state.time + dt, positions=x_new, mass=state.mass)


def integrate(initial: ParticleState, spec: ModelSpec,
              config: IntegratorConfig) -> Trajectory:
    """Advance the particle system to t_final, emitting dense-output
    snapshots at the requested times."""
    t = initial.time
    t_end = config.t_final
    if t >= t_end:
        raise ValueError("initial time must precede t_final")
    tol = config.abs_tolerance
    safety = config.safety_factor
    min_step = config.resolved_min_step()
    fixed_cap = config.max_step is not None
    max_step = config.max_step if fixed_cap else default_max_step(initial, spec, t_end)
    floor = (config.gap_floor if config.gap_floor is not None
             else 0.5 * float(np.min(initial.gaps)))

    snap_times = config.resolved_snapshots(t)
    log = StepLog()
    snapshots: list[ParticleState] = []
    si = 0
    if si < snap_times.size and snap_times[si] <= t:
        snapshots.append(ParticleState(time=t, positions=initial.positions,
                                       mass=initial.mass))
        si += 1

    stepper = _Stepper(initial, spec)
    x = np.array(initial.positions)
    stepper.work.fill(x, stepper.k[0])
    log.smallest_gap_seen = float(np.min(initial.gaps))

    dt = max(min_step, min(max_step, 1e-6 * (t_end - t)))
    err_prev = 1.0

    while t < t_end:
        last = dt >= t_end - t
        if last:
            dt = t_end - t
        x_new = stepper.stages(x, dt)
        min_gap = float(np.min(np.diff(x_new)))
        err = stepper.error_estimate(dt)
        if not np.isfinite(err) or not np.isfinite(min_gap):
            raise IntegrationError("non-finite right-hand side", t, min_gap,
                                   partial=snapshots)

        if min_gap <= floor:
            log.rejected_gap += 1
            dt *= 0.5
            if not fixed_cap:
                max_step = default_max_step(
                    ParticleState(time=t, positions=x, mass=initial.mass),
                    spec, t_end)
            if dt < min_step:
                raise IntegrationError(
                    "step size underflow while avoiding a gap collapse; the "
                    "configuration has left the scheme's proven regime", t, min_gap,
                    partial=snapshots)
            continue

        enorm = err / tol
        if enorm <= 1.0:
            t_new = t_end if last else t + dt
            while si < snap_times.size and snap_times[si] <= t_new:
                ts = snap_times[si]
                if ts == t_new:
                    pos = x_new
                else:
                    pos = stepper.interpolate(x, x_new, dt, (ts - t) / dt)
                snapshots.append(ParticleState(time=ts, positions=pos,
                                               mass=initial.mass))
                si += 1
            t = t_new
            x = x_new
            stepper.k[0], stepper.k[6] = stepper.k[6], stepper.k[0]
            log.accepted += 1
            log.accepted_sizes.append(dt)
            if min_gap < log.smallest_gap_seen:
                log.smallest_gap_seen = min_gap
            if enorm > 0.0:
                factor = safety * enorm ** -_PI_ALPHA * err_prev ** _PI_BETA
            else:
                factor = _MAX_GROWTH
            err_prev = max(enorm, 1e-12)
            dt *= min(_MAX_GROWTH, max(_MIN_SHRINK, factor))
            dt = min(dt, max_step)
        else:
            log.rejected_error += 1
            dt *= min(1.0, max(_MIN_SHRINK, safety * enorm ** -0.2))
            if dt < min_step:
                raise IntegrationError("step size underflow under error control",
                                       t, min_gap, partial=snapshots)

    return Trajectory(snapshots=snapshots, step_log=log)
