"""Drives simulations from RunConfigs and persists results as stable text.

Every float is serialized with repr, the shortest decimal that round-trips
to the same double, so reruns of the same resolved configuration produce
byte-identical files.
"""
from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional

import numpy as np

from .atomization import ParticleState, atomize
from .config import RunConfig, parse_config, render_manifest
from .densities import DiscreteDensity, l1_distance, reconstruct_density, wasserstein1
from .diagnostics import DiagnosticsReport, run_diagnostics
from .integrator import (IntegrationError, IntegratorConfig, StepLog, Trajectory,
                         integrate)
from .model import validate

EXIT_OK = 0
EXIT_DIAGNOSTIC_FAIL = 1
EXIT_CONFIG_ERROR = 2
EXIT_INTEGRATION_FAIL = 3


def _fmt(value: float) -> str:
    return repr(float(value))


def integrator_config_for(config: RunConfig, particles: int,
                          datum_upper_bound: float, mass: float,
                          snapshot_times: Optional[tuple[float, ...]] = None
                          ) -> IntegratorConfig:
    """Integrator settings for one run; the gap floor is half the proven
    lower gap bound for the datum."""
    floor = mass / (2.0 * datum_upper_bound * particles)
    if snapshot_times is None:
        times = tuple(np.linspace(0.0, config.t_final, config.snapshots))
    else:
        times = snapshot_times
    return IntegratorConfig(t_final=config.t_final,
                            abs_tolerance=config.abs_tolerance,
                            safety_factor=config.safety_factor,
                            max_step=config.max_step,
                            min_step=config.min_step,
                            snapshot_times=times,
                            gap_floor=floor)


# ----------------------------------------------------------------------
# CSV formats
# ----------------------------------------------------------------------

def write_snapshots_csv(path: Path, snapshots: list[ParticleState]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", "cell_index", "x_left", "x_right", "density"])
        for state in snapshots:
            x = state.positions
            dens = state.mass / (state.particle_count * np.diff(x))
            t = _fmt(state.time)
            for i in range(state.particle_count):
                writer.writerow([t, i, _fmt(x[i]), _fmt(x[i + 1]), _fmt(dens[i])])


def read_snapshots_csv(path: Path) -> list[tuple[float, DiscreteDensity]]:
    """Rebuild (time, density) pairs from a snapshots file."""
    rows: dict[float, list[tuple[int, float, float, float]]] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            t = float(row["time"])
            rows.setdefault(t, []).append((int(row["cell_index"]),
                                           float(row["x_left"]),
                                           float(row["x_right"]),
                                           float(row["density"])))
    out = []
    for t in sorted(rows):
        cells = sorted(rows[t])
        breakpoints = np.array([c[1] for c in cells] + [cells[-1][2]])
        values = np.array([c[3] for c in cells])
        mass = float(np.sum(values * np.diff(breakpoints)))
        out.append((t, DiscreteDensity(breakpoints=breakpoints, values=values,
                                       mass=mass)))
    return out


def write_trajectory_csv(path: Path, snapshots: list[ParticleState]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", "particle_index", "position"])
        for state in snapshots:
            t = _fmt(state.time)
            for i, pos in enumerate(state.positions):
                writer.writerow([t, i, _fmt(pos)])


def read_trajectory_csv(path: Path, mass: float) -> list[ParticleState]:
    rows: dict[float, list[tuple[int, float]]] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            t = float(row["time"])
            rows.setdefault(t, []).append((int(row["particle_index"]),
                                           float(row["position"])))
    states = []
    for t in sorted(rows):
        positions = np.array([p for _, p in sorted(rows[t])])
        states.append(ParticleState(time=t, positions=positions, mass=mass))
    return states


def report_rows(report: DiagnosticsReport, log: Optional[StepLog],
                validation_issues: int) -> list[tuple[str, str]]:
    rows: list[tuple[str, str]] = []
    if log is not None:
        rows += [("steps_accepted", str(log.accepted)),
                 ("steps_rejected_error", str(log.rejected_error)),
                 ("steps_rejected_gap", str(log.rejected_gap)),
                 ("smallest_gap_seen", _fmt(log.smallest_gap_seen))]
    rows.append(("validation_issues", str(validation_issues)))
    if report.minmax is not None:
        mm = report.minmax
        rows += [("minmax_applicable", "true"),
                 ("minmax_all_passed", "true" if mm.all_passed else "false"),
                 ("minmax_c_used", _fmt(mm.c_used)),
                 ("minmax_lower_bound", _fmt(mm.lower_bound)),
                 ("minmax_smallest_gap", _fmt(float(mm.min_gaps.min()))),
                 ("minmax_largest_gap", _fmt(float(mm.max_gaps.max())))]
    else:
        rows.append(("minmax_applicable", "false"))
    rows += [("tv_initial", _fmt(float(report.tv.tv_values[0]))),
             ("tv_final", _fmt(float(report.tv.tv_values[-1]))),
             ("tv_growth_rate", _fmt(report.tv.growth_rate)),
             ("tv_forcing_rate", _fmt(report.tv.forcing_rate)),
             ("tv_min_margin", _fmt(float(report.tv.margins.min()))),
             ("tv_envelope_holds", "true" if report.tv.holds else "false"),
             ("w1_time_lipschitz", _fmt(report.w1_lipschitz))]
    for mode in sorted(report.weak_residuals):
        rows.append((f"weak_residual_mode_{mode}", _fmt(report.weak_residuals[mode])))
    return rows


def write_report(out_dir: Path, report: DiagnosticsReport, log: Optional[StepLog],
                 validation_text: str, validation_issues: int) -> None:
    rows = report_rows(report, log, validation_issues)
    with open(out_dir / "report.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["field", "value"])
        writer.writerows(rows)
    text = io.StringIO()
    text.write("diagnostics report\n==================\n")
    for key, value in rows:
        text.write(f"{key:28s} {value}\n")
    text.write("\nmodel validation\n----------------\n")
    text.write(validation_text + "\n")
    (out_dir / "report.txt").write_text(text.getvalue())


# ----------------------------------------------------------------------
# run modes
# ----------------------------------------------------------------------

def run_single(config: RunConfig, out_dir: Path) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    datum = config.build_datum()
    spec = config.build_spec(datum)
    report_v = validate(spec, datum)
    state = atomize(datum, spec, config.particles)
    icfg = integrator_config_for(config, config.particles, datum.upper_bound,
                                 spec.mass)
    manifest = render_manifest(config)
    try:
        traj = integrate(state, spec, icfg)
    except IntegrationError as exc:
        (out_dir / "manifest.toml").write_text(
            manifest + f'\n# FAILED: {exc}\n[status]\nfailed = true\n')
        if exc.partial:
            write_snapshots_csv(out_dir / "snapshots.csv", exc.partial)
            write_trajectory_csv(out_dir / "trajectory.csv", exc.partial)
        return EXIT_INTEGRATION_FAIL

    write_snapshots_csv(out_dir / "snapshots.csv", traj.snapshots)
    write_trajectory_csv(out_dir / "trajectory.csv", traj.snapshots)
    diag = run_diagnostics(traj, spec, datum, weak_modes=config.weak_modes)
    write_report(out_dir, diag, traj.step_log, str(report_v), len(report_v.issues))
    (out_dir / "manifest.toml").write_text(manifest)
    return EXIT_OK if diag.all_passed else EXIT_DIAGNOSTIC_FAIL


def _converge_task(args: tuple[str, int]) -> tuple[int, bytes, float]:
    """Worker for the converge fan-out: returns the final positions."""
    text, n = args
    config = parse_config(text)
    datum = config.build_datum()
    spec = config.build_spec(datum)
    state = atomize(datum, spec, n)
    icfg = integrator_config_for(config, n, datum.upper_bound, spec.mass,
                                 snapshot_times=(config.t_final,))
    traj = integrate(state, spec, icfg)
    return n, traj.snapshots[-1].positions.tobytes(), spec.mass


def run_converge(config: RunConfig, out_dir: Path) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    text = render_manifest(config)
    tasks = [(text, n) for n in config.n_list]
    results: dict[int, tuple[bytes, float]] = {}
    try:
        if config.workers > 1:
            with ProcessPoolExecutor(max_workers=config.workers) as pool:
                for n, raw, mass in pool.map(_converge_task, tasks):
                    results[n] = (raw, mass)
        else:
            for task in tasks:
                n, raw, mass = _converge_task(task)
                results[n] = (raw, mass)
    except IntegrationError as exc:
        (out_dir / "manifest.toml").write_text(
            text + f'\n# FAILED: {exc}\n[status]\nfailed = true\n')
        return EXIT_INTEGRATION_FAIL

    finals = {}
    for n in config.n_list:
        raw, mass = results[n]
        positions = np.frombuffer(raw)
        finals[n] = reconstruct_density(
            ParticleState(time=config.t_final, positions=positions, mass=mass))
    with open(out_dir / "convergence_table.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n_coarse", "n_fine", "l1_distance", "w1_distance"])
        for a, b in zip(config.n_list[:-1], config.n_list[1:]):
            writer.writerow([a, b, _fmt(l1_distance(finals[a], finals[b])),
                             _fmt(wasserstein1(finals[a], finals[b]))])
    (out_dir / "manifest.toml").write_text(text)
    return EXIT_OK


def recompute_metrics(run_dir: Path) -> int:
    """Rebuild the diagnostics report of an existing run from its stored
    trajectory, without re-integrating."""
    manifest = (run_dir / "manifest.toml").read_text()
    config = parse_config(manifest)
    datum = config.build_datum()
    spec = config.build_spec(datum)
    states = read_trajectory_csv(run_dir / "trajectory.csv", spec.mass)
    traj = Trajectory(snapshots=states, step_log=StepLog())
    report_v = validate(spec, datum)
    diag = run_diagnostics(traj, spec, datum, weak_modes=config.weak_modes)
    write_report(run_dir, diag, None, str(report_v), len(report_v.issues))
    return EXIT_OK if diag.all_passed else EXIT_DIAGNOSTIC_FAIL


def execute(config: RunConfig, out_dir: Path) -> int:
    if config.mode == "converge":
        return run_converge(config, out_dir)
    return run_single(config, out_dir)
