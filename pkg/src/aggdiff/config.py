"""Run configuration: a small TOML schema mapped onto the model presets.

The grammar is documented in the README; every error carries the dotted
path of the offending key so misconfigured files fail with a list of
actionable messages rather than a stack trace.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Any, Optional

try:
    import tomllib
except ImportError:  # Python 3.10
    import tomli as tomllib

from .model import (InitialDatum, ModelSpec, constant_datum, gaussian_kernel,
                    make_spec, oscillating_datum, porous_medium_diffusion,
                    saturating_velocity, strongly_degenerate_diffusion,
                    two_point_diffusion, two_step_datum)

MODES = ("single", "diagnostics", "converge")
DIFFUSION_PRESETS = ("porous_medium", "two_point", "strongly_degenerate")
DATUM_PRESETS = ("constant", "two_step", "oscillating")


class ConfigError(ValueError):
    def __init__(self, problems: list[tuple[str, str]]):
        self.problems = problems
        lines = [f"{path}: {msg}" for path, msg in problems]
        super().__init__("invalid configuration:\n" + "\n".join(lines))


@dataclass(frozen=True)
class RunConfig:
    mode: str
    particles: int
    t_final: float
    snapshots: int
    workers: int
    weak_modes: int
    n_list: tuple[int, ...]
    diffusion_preset: str
    epsilon: float
    exponent: float
    velocity_max_density: float
    kernel_strength: float
    datum_preset: str
    datum_value: float
    datum_left: float
    datum_right: float
    datum_split: float
    datum_length: float
    abs_tolerance: float
    safety_factor: float
    max_step: Optional[float]
    min_step: Optional[float]

    def build_datum(self) -> InitialDatum:
        if self.datum_preset == "constant":
            return constant_datum(self.datum_value, self.datum_length)
        if self.datum_preset == "two_step":
            return two_step_datum(self.datum_left, self.datum_right,
                                  self.datum_split, self.datum_length)
        return oscillating_datum()

    def build_spec(self, datum: Optional[InitialDatum] = None) -> ModelSpec:
        datum = datum if datum is not None else self.build_datum()
        if self.diffusion_preset == "porous_medium":
            diffusion = porous_medium_diffusion(self.epsilon)
        elif self.diffusion_preset == "two_point":
            diffusion = two_point_diffusion(self.epsilon, self.exponent)
        else:
            diffusion = strongly_degenerate_diffusion(self.epsilon)
        velocity = saturating_velocity(self.velocity_max_density)
        kernel = gaussian_kernel(self.kernel_strength, domain_length=datum.length)
        return make_spec(diffusion, velocity, kernel, datum)


_DEFAULTS: dict[str, Any] = {
    "mode": "single",
    "snapshots": 101,
    "workers": 1,
    "weak_modes": -1,       # resolved from the mode when unset
    "n_list": (),
    "exponent": 2.0,
    "datum_value": 0.7,
    "datum_left": 1.0,
    "datum_right": 0.5,
    "datum_split": 0.5,
    "datum_length": 1.0,
    "abs_tolerance": 1e-8,
    "safety_factor": 0.8,
    "max_step": None,
    "min_step": None,
}


def _get_number(table: dict, key: str, path: str, problems: list,
                required: bool = False, default: Any = None,
                positive: bool = False, integer: bool = False) -> Any:
    if key not in table:
        if required:
            problems.append((path, "required key is missing"))
        return default
    value = table[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        problems.append((path, f"expected a number, got {value!r}"))
        return default
    if integer:
        if isinstance(value, float) and not value.is_integer():
            problems.append((path, f"expected an integer, got {value!r}"))
            return default
        value = int(value)
    else:
        value = float(value)
    if positive and value <= 0:
        problems.append((path, f"must be positive, got {value!r}"))
        return default
    if not integer and not math.isfinite(value):
        problems.append((path, "must be finite"))
        return default
    return value


def parse_config(text: str) -> RunConfig:
    """Parse a TOML run configuration; raises ConfigError listing every
    problem with its dotted key path."""
    problems: list[tuple[str, str]] = []
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([("<document>", f"TOML syntax error: {exc}")])

    run = doc.get("run", {})
    model = doc.get("model", {})
    diffusion = model.get("diffusion", {})
    velocity = model.get("velocity", {})
    kernel = model.get("kernel", {})
    datum = model.get("datum", {})
    integ = doc.get("integrator", {})

    particles = _get_number(run, "n", "run.n", problems, required=True,
                            positive=True, integer=True)
    t_final = _get_number(run, "t_final", "run.t_final", problems,
                          required=True, positive=True)
    mode = run.get("mode", _DEFAULTS["mode"])
    if mode not in MODES:
        problems.append(("run.mode", f"unknown mode {mode!r}; choose from {MODES}"))
    snapshots = _get_number(run, "snapshots", "run.snapshots", problems,
                            default=_DEFAULTS["snapshots"], positive=True, integer=True)
    workers = _get_number(run, "workers", "run.workers", problems,
                          default=_DEFAULTS["workers"], positive=True, integer=True)
    weak_modes = _get_number(run, "weak_modes", "run.weak_modes", problems,
                             default=-1, integer=True)
    if weak_modes == -1:
        weak_modes = 3 if mode == "diagnostics" else 0
    if weak_modes is not None and weak_modes < 0:
        problems.append(("run.weak_modes", "must be nonnegative"))

    n_list: tuple[int, ...] = ()
    if "n_list" in run:
        raw = run["n_list"]
        if (not isinstance(raw, list) or not raw
                or any(isinstance(v, bool) or not isinstance(v, int) for v in raw)):
            problems.append(("run.n_list", "expected a nonempty list of integers"))
        elif any(v < 2 for v in raw):
            problems.append(("run.n_list", "every entry must be at least 2"))
        else:
            n_list = tuple(raw)
    elif mode == "converge":
        problems.append(("run.n_list", "required key is missing in converge mode"))

    dpreset = diffusion.get("preset")
    if dpreset is None:
        problems.append(("model.diffusion.preset", "required key is missing"))
    elif dpreset not in DIFFUSION_PRESETS:
        problems.append(("model.diffusion.preset",
                         f"unknown preset {dpreset!r}; choose from {DIFFUSION_PRESETS}"))
    epsilon = _get_number(diffusion, "epsilon", "model.diffusion.epsilon", problems,
                          required=dpreset is not None, default=1.0, positive=True)
    exponent = _get_number(diffusion, "exponent", "model.diffusion.exponent", problems,
                           default=_DEFAULTS["exponent"])
    if exponent is not None and exponent < 2:
        problems.append(("model.diffusion.exponent", "must be at least 2"))

    vpreset = velocity.get("preset")
    if vpreset is None:
        problems.append(("model.velocity.preset", "required key is missing"))
    elif vpreset != "saturating":
        problems.append(("model.velocity.preset",
                         f"unknown preset {vpreset!r}; only 'saturating' is shipped"))
    vmax_density = _get_number(velocity, "max_density", "model.velocity.max_density",
                               problems, default=1.0, positive=True)

    kpreset = kernel.get("preset")
    if kpreset is None:
        problems.append(("model.kernel.preset", "required key is missing"))
    elif kpreset != "gaussian":
        problems.append(("model.kernel.preset",
                         f"unknown preset {kpreset!r}; only 'gaussian' is shipped"))
    strength = _get_number(kernel, "strength", "model.kernel.strength", problems,
                           default=1.0, positive=True)

    datum_preset = datum.get("preset")
    if datum_preset is None:
        problems.append(("model.datum.preset", "required key is missing"))
    elif datum_preset not in DATUM_PRESETS:
        problems.append(("model.datum.preset",
                         f"unknown preset {datum_preset!r}; choose from {DATUM_PRESETS}"))
    datum_value = _get_number(datum, "value", "model.datum.value", problems,
                              default=_DEFAULTS["datum_value"], positive=True)
    datum_left = _get_number(datum, "left", "model.datum.left", problems,
                             default=_DEFAULTS["datum_left"], positive=True)
    datum_right = _get_number(datum, "right", "model.datum.right", problems,
                              default=_DEFAULTS["datum_right"], positive=True)
    datum_split = _get_number(datum, "split", "model.datum.split", problems,
                              default=_DEFAULTS["datum_split"], positive=True)
    datum_length = _get_number(datum, "length", "model.datum.length", problems,
                               default=_DEFAULTS["datum_length"], positive=True)
    if datum_preset == "two_step" and datum_split is not None \
            and datum_length is not None and not 0 < datum_split < datum_length:
        problems.append(("model.datum.split", "must lie strictly inside the domain"))
    if datum_preset == "oscillating":
        datum_length = 2.0

    abs_tol = _get_number(integ, "abs_tolerance", "integrator.abs_tolerance",
                          problems, default=_DEFAULTS["abs_tolerance"], positive=True)
    safety = _get_number(integ, "safety_factor", "integrator.safety_factor",
                         problems, default=_DEFAULTS["safety_factor"], positive=True)
    if safety is not None and safety > 1.0:
        problems.append(("integrator.safety_factor", "must not exceed 1"))
    max_step = _get_number(integ, "max_step", "integrator.max_step", problems,
                           default=None, positive=True)
    min_step = _get_number(integ, "min_step", "integrator.min_step", problems,
                           default=None, positive=True)

    if problems:
        raise ConfigError(problems)

    return RunConfig(mode=mode, particles=particles, t_final=t_final,
                     snapshots=snapshots, workers=workers, weak_modes=weak_modes,
                     n_list=n_list, diffusion_preset=dpreset, epsilon=epsilon,
                     exponent=exponent, velocity_max_density=vmax_density,
                     kernel_strength=strength, datum_preset=datum_preset,
                     datum_value=datum_value, datum_left=datum_left,
                     datum_right=datum_right, datum_split=datum_split,
                     datum_length=datum_length, abs_tolerance=abs_tol,
                     safety_factor=safety, max_step=max_step, min_step=min_step)


def _toml_scalar(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        # repr gives the shortest decimal that round-trips
        text = repr(value)
        return text if any(c in text for c in ".einf") else text + ".0"
    if isinstance(value, str):
        return '"' + value + '"'
    if isinstance(value, tuple):
        return "[" + ", ".join(_toml_scalar(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {value!r}")


def render_manifest(config: RunConfig) -> str:
    """Serialize a fully resolved config back to TOML.

    Re-parsing the result yields an identical RunConfig, which is what makes
    a manifest a rerunnable record of its run.
    """
    lines = ["# resolved run configuration (rerunnable)", "", "[run]"]
    lines.append(f"mode = {_toml_scalar(config.mode)}")
    lines.append(f"n = {config.particles}")
    lines.append(f"t_final = {_toml_scalar(config.t_final)}")
    lines.append(f"snapshots = {config.snapshots}")
    lines.append(f"workers = {config.workers}")
    lines.append(f"weak_modes = {config.weak_modes}")
    if config.n_list:
        lines.append(f"n_list = {_toml_scalar(config.n_list)}")
    lines += ["", "[model.diffusion]",
              f"preset = {_toml_scalar(config.diffusion_preset)}",
              f"epsilon = {_toml_scalar(config.epsilon)}"]
    if config.diffusion_preset == "two_point":
        lines.append(f"exponent = {_toml_scalar(config.exponent)}")
    lines += ["", "[model.velocity]", 'preset = "saturating"',
              f"max_density = {_toml_scalar(config.velocity_max_density)}"]
    lines += ["", "[model.kernel]", 'preset = "gaussian"',
              f"strength = {_toml_scalar(config.kernel_strength)}"]
    lines += ["", "[model.datum]", f"preset = {_toml_scalar(config.datum_preset)}"]
    if config.datum_preset == "constant":
        lines.append(f"value = {_toml_scalar(config.datum_value)}")
        lines.append(f"length = {_toml_scalar(config.datum_length)}")
    elif config.datum_preset == "two_step":
        lines.append(f"left = {_toml_scalar(config.datum_left)}")
        lines.append(f"right = {_toml_scalar(config.datum_right)}")
        lines.append(f"split = {_toml_scalar(config.datum_split)}")
        lines.append(f"length = {_toml_scalar(config.datum_length)}")
    lines += ["", "[integrator]",
              f"abs_tolerance = {_toml_scalar(config.abs_tolerance)}",
              f"safety_factor = {_toml_scalar(config.safety_factor)}"]
    if config.max_step is not None:
        lines.append(f"max_step = {_toml_scalar(config.max_step)}")
    if config.min_step is not None:
        lines.append(f"min_step = {_toml_scalar(config.min_step)}")
    return "\n".join(lines) + "\n"


def with_overrides(config: RunConfig, particles: Optional[int] = None,
                   t_final: Optional[float] = None,
                   workers: Optional[int] = None) -> RunConfig:
    updates: dict[str, Any] = {}
    if particles is not None:
        updates["particles"] = particles
    if t_final is not None:
        updates["t_final"] = t_final
    if workers is not None:
        updates["workers"] = workers
    if not updates:
        return config
    values = {f.name: getattr(config, f.name) for f in fields(config)}
    values.update(updates)
    return RunConfig(**values)
