"""Render simulation CSV outputs as publication-style figures.

Densities are piecewise constant, so they are always drawn as steps;
interpolating them would misrepresent the reconstruction.  Trajectory
panels draw one polyline per particle index.  Rendering only reads the
inputs, and identical inputs produce identical image bytes.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

KINDS = ("density_overlay", "trajectories", "combined")
DEGENERACY_BAND = (0.4, 0.6)


@dataclass(frozen=True)
class FigureSpec:
    inputs: tuple[Path, ...]
    kind: str
    out: Path
    labels: tuple[str, ...] = ()
    band: bool = False
    show_initial: bool = False
    x_label: str = "x"
    density_label: str = "density"
    time_label: str = "t"
    dpi: int = 150

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; choose from {KINDS}")
        if not self.inputs:
            raise ValueError("at least one input CSV is required")


@dataclass
class SnapshotSeries:
    """All snapshots of one run: per time, breakpoints and cell values."""
    times: list[float] = field(default_factory=list)
    breakpoints: list[np.ndarray] = field(default_factory=list)
    values: list[np.ndarray] = field(default_factory=list)

    def at(self, index: int) -> tuple[np.ndarray, np.ndarray]:
        return self.breakpoints[index], self.values[index]


def read_snapshots(path: Path) -> SnapshotSeries:
    """Parse a snapshots.csv (time, cell_index, x_left, x_right, density)."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"snapshot file not found: {path}")
    per_time: dict[float, list[tuple[int, float, float, float]]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        needed = {"time", "cell_index", "x_left", "x_right", "density"}
        if reader.fieldnames is None or not needed <= set(reader.fieldnames):
            raise ValueError(f"{path} is not a snapshots file (columns {reader.fieldnames})")
        for row in reader:
            t = float(row["time"])
            per_time.setdefault(t, []).append(
                (int(row["cell_index"]), float(row["x_left"]),
                 float(row["x_right"]), float(row["density"])))
    series = SnapshotSeries()
    for t in sorted(per_time):
        cells = sorted(per_time[t])
        series.times.append(t)
        series.breakpoints.append(np.array([c[1] for c in cells] + [cells[-1][2]]))
        series.values.append(np.array([c[3] for c in cells]))
    if not series.times:
        raise ValueError(f"{path} contains no snapshots")
    return series


def read_trajectory(path: Path) -> tuple[np.ndarray, np.ndarray]:
    """Parse a trajectory.csv into (times, positions[time, particle])."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"trajectory file not found: {path}")
    per_time: dict[float, list[tuple[int, float]]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        needed = {"time", "particle_index", "position"}
        if reader.fieldnames is None or not needed <= set(reader.fieldnames):
            raise ValueError(f"{path} is not a trajectory file (columns {reader.fieldnames})")
        for row in reader:
            per_time.setdefault(float(row["time"]), []).append(
                (int(row["particle_index"]), float(row["position"])))
    if not per_time:
        raise ValueError(f"{path} contains no rows")
    times = np.array(sorted(per_time))
    positions = np.array([[p for _, p in sorted(per_time[t])] for t in times])
    return times, positions


def _step(ax, breakpoints: np.ndarray, values: np.ndarray, **kw):
    # repeat the last cell value so the final step extends to the last edge
    return ax.step(breakpoints, np.append(values, values[-1]), where="post", **kw)


def _draw_band(ax) -> None:
    lo, hi = DEGENERACY_BAND
    ax.axhline(lo, color="green", linewidth=1.0)
    ax.axhline(hi, color="green", linewidth=1.0)
    ax.axhspan(lo, hi, color="green", alpha=0.08)


def _label_for(spec: FigureSpec, index: int) -> str:
    if index < len(spec.labels):
        return spec.labels[index]
    return Path(spec.inputs[index]).resolve().parent.name


def _density_axis(ax, spec: FigureSpec) -> None:
    for i, path in enumerate(spec.inputs):
        series = read_snapshots(Path(path))
        bp, vals = series.at(-1)
        _step(ax, bp, vals, label=f"{_label_for(spec, i)} (t={series.times[-1]:g})")
        if spec.show_initial:
            bp0, vals0 = series.at(0)
            _step(ax, bp0, vals0, linestyle="--", alpha=0.6,
                  label=f"{_label_for(spec, i)} (t=0)")
    if spec.band:
        _draw_band(ax)
    ax.set_xlabel(spec.x_label)
    ax.set_ylabel(spec.density_label)
    ax.legend(fontsize=8)


def _trajectory_axis(ax, spec: FigureSpec) -> None:
    for path in spec.inputs:
        path = Path(path)
        traj_path = path if path.name != "snapshots.csv" \
            else path.with_name("trajectory.csv")
        times, positions = read_trajectory(traj_path)
        for j in range(positions.shape[1]):
            ax.plot(positions[:, j], times, color="tab:blue", linewidth=0.4)
    ax.set_xlabel(spec.x_label)
    ax.set_ylabel(spec.time_label)


def build_figure(spec: FigureSpec):
    """Assemble the matplotlib figure for a spec (rendering minus the file)."""
    if spec.kind == "density_overlay":
        fig, ax = plt.subplots(figsize=(6.4, 4.0))
        _density_axis(ax, spec)
    elif spec.kind == "trajectories":
        fig, ax = plt.subplots(figsize=(6.4, 4.0))
        _trajectory_axis(ax, spec)
    else:
        fig, (top, bottom) = plt.subplots(2, 1, figsize=(6.4, 7.2),
                                          height_ratios=[1, 1.2])
        _density_axis(top, spec)
        _trajectory_axis(bottom, spec)
    fig.tight_layout()
    return fig


def render(spec: FigureSpec) -> Path:
    """Write the figure to spec.out and return the path."""
    fig = build_figure(spec)
    out = Path(spec.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    try:
        fig.savefig(out, dpi=spec.dpi)
    finally:
        plt.close(fig)
    return out
