"""Run and sweep configuration: dataclasses plus TOML loading."""

from __future__ import annotations

import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml

from .axisym import AxisymRecipe
from .state import StepControl


class ConfigError(ValueError):
    """Invalid or missing configuration (CLI exit code 2)."""


@dataclass(frozen=True)
class RecipeConfig:
    profile: str = "gaussian-bump"
    amplitude: float = 1.0
    width: float = 0.24
    taper: float = 12.0
    ring_radius: float = 0.742
    acoustic_amplitude: float = 1.0
    gradient_amplitude: float = 1.0
    acoustic_width: float | None = None
    prepared: str = "ill"

    def to_recipe(self) -> AxisymRecipe:
        if self.prepared not in ("ill", "well"):
            raise ConfigError(f"prepared must be 'ill' or 'well', got {self.prepared!r}")
        return AxisymRecipe(
            profile=self.profile,
            amplitude=self.amplitude,
            width=self.width,
            taper=self.taper,
            ring_radius=self.ring_radius,
            acoustic_amplitude=self.acoustic_amplitude,
            gradient_amplitude=self.gradient_amplitude,
            acoustic_width=self.acoustic_width,
        )


@dataclass(frozen=True)
class RunConfig:
    n: int = 64
    eps: float = 0.5
    gamma_bar: float = 0.5
    cfl: float = 0.4
    dt_eps_factor: float = 0.5
    blowup_factor: float = 10.0
    tail_fraction_max: float = 1e-3
    t_final: float = 0.25
    sample_dt: float = 0.05
    checkpoint_dt: float = 0.0
    seed: int = 0
    mode: str = "compressible"  # | "incompressible" | "linear"
    axisym_diagnostics: bool = True
    recipe: RecipeConfig = field(default_factory=RecipeConfig)

    def __post_init__(self):
        if self.mode not in ("compressible", "incompressible", "linear"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.eps <= 0:
            raise ConfigError(f"eps must be positive, got {self.eps}")
        if self.t_final < 0:
            raise ConfigError("t_final must be nonnegative")
        if self.sample_dt <= 0:
            raise ConfigError("sample_dt must be positive")

    def step_control(self) -> StepControl:
        return StepControl(
            cfl=self.cfl,
            dt_eps_factor=self.dt_eps_factor,
            blowup_factor=self.blowup_factor,
            tail_fraction_max=self.tail_fraction_max,
        )

    def echo(self) -> dict:
        d = asdict(self)
        return d


#: metrics the sweep fits by default; the assert list is the acceptance gate
DEFAULT_FIT_METRICS = [
    "div_l1t_linf",
    "sup_pv_minus_ref_l2",
    "acoustic_time_avg_l1",
    "div_time_avg_linf",
    "qv_l1t_linf",
]


@dataclass(frozen=True)
class SweepConfig:
    run: RunConfig = field(default_factory=RunConfig)
    eps_list: tuple[float, ...] = (0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625)
    metrics: tuple[str, ...] = tuple(DEFAULT_FIT_METRICS)
    threads: int = 1
    compare_reference: bool = True

    def __post_init__(self):
        if len(self.eps_list) < 3:
            raise ConfigError("sweep needs at least 3 eps values for slope fitting")
        if any(e <= 0 for e in self.eps_list):
            raise ConfigError("eps values must be positive")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")


def _take(table: dict, cls, what: str):
    names = {f for f in cls.__dataclass_fields__}
    unknown = set(table) - names
    if unknown:
        raise ConfigError(f"unknown {what} option(s): {sorted(unknown)}")
    return table


def load_config(path: str | Path):
    """Parse a TOML config; returns ("run" | "sweep", config)."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, "rb") as fh:
            data = _toml.load(fh)
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc

    recipe_tbl = data.pop("recipe", {})
    recipe = RecipeConfig(**_take(recipe_tbl, RecipeConfig, "recipe"))
    run_tbl = data.pop("run", {})
    sweep_tbl = data.pop("sweep", None)
    if data:
        raise ConfigError(f"unknown config table(s): {sorted(data)}")
    try:
        run = RunConfig(recipe=recipe, **_take(run_tbl, RunConfig, "run"))
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    if sweep_tbl is None:
        return "run", run
    sweep_tbl = dict(sweep_tbl)
    if "eps_list" in sweep_tbl:
        sweep_tbl["eps_list"] = tuple(float(e) for e in sweep_tbl["eps_list"])
    if "metrics" in sweep_tbl:
        sweep_tbl["metrics"] = tuple(sweep_tbl["metrics"])
    try:
        sweep = SweepConfig(run=run, **_take(sweep_tbl, SweepConfig, "sweep"))
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return "sweep", sweep


def with_eps(config: RunConfig, eps: float) -> RunConfig:
    return replace(config, eps=eps)
