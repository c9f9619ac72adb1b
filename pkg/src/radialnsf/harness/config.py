"""Scenario configuration: one YAML file describes one reproducible run.

Example::

    name: bump
    grid: {M: 256, kind: uniform}
    physics: {mu: 1.0, lam: 0.0, kappa: 1.0, R: 1.0}
    scheme: {theta_implicit: 0.5}
    fixed_dt: 2.0e-4
    monitor: {core_mass: 0.05}
    representation: {anchor_mass: 0.25, form: exact}
    initial_data: {kind: gaussianBump, amplitude: 0.3, width: 0.2, center: 0.7}
    end_time: 0.1
    output_interval: 0.01
"""

from __future__ import annotations

import copy
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import yaml

from ..core import PhysParams, ValidationError, validate_params
from ..diagnostics import MonitorConfig
from ..scheme import SchemeConfig

INITIAL_KINDS = ("constant", "gaussianBump", "vacuumCore", "shellConcentration")


class ConfigError(ValidationError):
    pass


@dataclass(frozen=True)
class InitialData:
    """Density profile family plus companion velocity and temperature.

    The velocity is ``velocity_amplitude * sin(pi r / b)`` and the temperature
    is constant. Every density is rescaled to unit mass, except that
    ``vacuumCore`` solves for its outer density so the floor is kept exactly.
    """

    kind: str = "constant"
    amplitude: float = 0.3
    width: float = 0.2
    center: float = 0.7
    floor_density: float = 0.05
    core_radius: float = 0.4
    transition_width: float = 0.1
    peak_density: float = 4.0
    shell_radius: float = 0.7
    velocity_amplitude: float = 0.0
    temperature: float = 1.0
    density_floor: float = 1e-3

    def __post_init__(self):
        if self.kind not in INITIAL_KINDS:
            raise ConfigError(f"unknown initial data kind {self.kind!r}; expected one of {INITIAL_KINDS}")
        if not self.temperature > 0:
            raise ConfigError("initial temperature must be positive")
        if not self.density_floor > 0:
            raise ConfigError("density floor must be positive")
        if self.kind == "vacuumCore" and not self.floor_density > 0:
            raise ConfigError("vacuumCore floor_density must be positive")
        if self.kind == "gaussianBump" and not self.width > 0:
            raise ConfigError("gaussianBump width must be positive")
        if self.kind == "shellConcentration" and not (self.width > 0 and self.peak_density > 0):
            raise ConfigError("shellConcentration needs positive width and peak density")


@dataclass(frozen=True)
class GridConfig:
    M: int = 128
    kind: str = "uniform"  # or "radial": nodes at equally spaced initial radii

    def __post_init__(self):
        if not isinstance(self.M, int) or self.M < 2:
            raise ConfigError(f"grid size M must be an integer >= 2, got {self.M!r}")
        if self.kind not in ("uniform", "radial"):
            raise ConfigError(f"grid kind must be 'uniform' or 'radial', got {self.kind!r}")


@dataclass(frozen=True)
class RepresentationConfig:
    enabled: bool = True
    anchor_mass: float = 0.25
    form: str = "exact"


@dataclass(frozen=True)
class MMSConfig:
    sizes: tuple = (64, 128, 256, 512)
    epsilon: float = 0.1
    ramp: float = 1.0
    end_time: float = 0.05
    dt_coarse: float = 2.5e-4  # at the coarsest size; scales like 1/M^2


@dataclass(frozen=True)
class SweepConfig:
    axes: dict = field(default_factory=dict)
    max_jobs: int = 64
    workers: int = 1


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "run"
    grid: GridConfig = field(default_factory=GridConfig)
    physics: PhysParams = field(default_factory=PhysParams)
    scheme: SchemeConfig = field(default_factory=SchemeConfig)
    fixed_dt: float | None = None
    monitor: MonitorConfig = field(default_factory=MonitorConfig)
    representation: RepresentationConfig = field(default_factory=RepresentationConfig)
    initial_data: InitialData = field(default_factory=InitialData)
    end_time: float = 0.1
    output_interval: float = 0.01
    seed: int = 0
    max_retries: int = 30
    mms: MMSConfig = field(default_factory=MMSConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)

    def __post_init__(self):
        if not (self.end_time > 0 and math.isfinite(self.end_time)):
            raise ConfigError(f"end_time must be positive, got {self.end_time}")
        if not self.output_interval > 0:
            raise ConfigError(f"output_interval must be positive, got {self.output_interval}")
        if self.fixed_dt is not None and not self.fixed_dt > 0:
            raise ConfigError("fixed_dt must be positive when given")
        validate_params(self.physics)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["monitor"]["serrin_exponents"] = list(self.monitor.serrin_exponents)
        d["mms"]["sizes"] = list(self.mms.sizes)
        return d

    def with_updates(self, updates: dict) -> "ScenarioConfig":
        """Apply dotted-key overrides such as ``{"initial_data.floor_density": 0.1}``."""
        raw = self.to_dict()
        for key, value in updates.items():
            node = raw
            parts = key.split(".")
            for part in parts[:-1]:
                if part not in node or not isinstance(node[part], dict):
                    raise ConfigError(f"unknown config key {key!r}")
                node = node[part]
            if parts[-1] not in node:
                raise ConfigError(f"unknown config key {key!r}")
            node[parts[-1]] = value
        return from_dict(raw)


_SECTIONS = {
    "grid": GridConfig,
    "physics": PhysParams,
    "scheme": SchemeConfig,
    "monitor": MonitorConfig,
    "representation": RepresentationConfig,
    "initial_data": InitialData,
    "mms": MMSConfig,
    "sweep": SweepConfig,
}


def _coerce(cls, key, value):
    # PyYAML reads ``1e-3`` (no dot) as a string
    ann = str({f.name: f.type for f in fields(cls)}[key])
    if ann.startswith("float") and isinstance(value, (str, int)) and not isinstance(value, bool):
        try:
            return float(value)
        except ValueError:
            raise ConfigError(f"{cls.__name__}.{key}: expected a number, got {value!r}") from None
    return value


def _build(cls, data, section):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"section {section!r} must be a mapping")
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown keys in {section!r}: {sorted(unknown)}")
    data = {k: _coerce(cls, k, v) for k, v in data.items()}
    if cls is MonitorConfig and "serrin_exponents" in data:
        data["serrin_exponents"] = tuple(float(x) for x in data["serrin_exponents"])
    if cls is MMSConfig and "sizes" in data:
        data["sizes"] = tuple(int(x) for x in data["sizes"])
    try:
        return cls(**data)
    except ValidationError as exc:
        raise ConfigError(f"{section}: {exc}") from exc
    except TypeError as exc:
        raise ConfigError(f"{section}: {exc}") from exc


def from_dict(raw: dict) -> ScenarioConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping at top level")
    raw = copy.deepcopy(raw)
    known = {f.name for f in fields(ScenarioConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    kwargs = {}
    for key, value in raw.items():
        if key in _SECTIONS:
            kwargs[key] = _build(_SECTIONS[key], value, key)
        elif value is None:
            kwargs[key] = value
        else:
            kwargs[key] = _coerce(ScenarioConfig, key, value)
    try:
        return ScenarioConfig(**kwargs)
    except ValidationError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ScenarioConfig:
    """Read a YAML config. I/O errors propagate as ``OSError``."""
    text = Path(path).read_text()
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: malformed YAML: {exc}") from exc
    return from_dict(raw or {})


def dump_config(cfg: ScenarioConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=True)


__all__ = [
    "ConfigError",
    "GridConfig",
    "InitialData",
    "MMSConfig",
    "RepresentationConfig",
    "ScenarioConfig",
    "SweepConfig",
    "dump_config",
    "from_dict",
    "load_config",
]
