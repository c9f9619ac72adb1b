"""Initial-data library: density families with companion velocity and
temperature, tabulated on a fine radial mesh and mapped to mass coordinates."""

from __future__ import annotations

import numpy as np
from scipy.integrate import trapezoid

from ..core import FluidState, MassGrid, PhysParams, validate_state
from ..lagrange import RadialProfile, radial_grid, to_lagrangian
from .config import ConfigError, InitialData, ScenarioConfig

SAMPLES = 20000


def _smoothstep(x):
    """C^1 ramp from 0 (x <= 0) to 1 (x >= 1)."""
    x = np.clip(x, 0.0, 1.0)
    return x * x * (3.0 - 2.0 * x)


def _unit_mass(rho, r):
    return rho / trapezoid(rho * r**2, r)


def density_profile(init: InitialData, b: float, r: np.ndarray) -> np.ndarray:
    """Density samples on ``r`` carrying unit mass (``int rho r^2 dr = 1``)."""
    if init.kind == "constant":
        return _unit_mass(np.ones_like(r), r)
    if init.kind == "gaussianBump":
        return _unit_mass(1.0 + init.amplitude * np.exp(-(((r - init.center) / init.width) ** 2)), r)
    if init.kind == "shellConcentration":
        base = 1.0 + (init.peak_density - 1.0) * np.exp(-(((r - init.shell_radius) / init.width) ** 2))
        return _unit_mass(base, r)
    # vacuumCore: floor inside core_radius, ramp to an outer plateau chosen for unit mass
    rc, w = init.core_radius, init.transition_width
    if not 0.0 < rc < rc + w < b:
        raise ConfigError(f"vacuumCore needs 0 < core_radius < core_radius + transition_width < b = {b:.6g}")
    ramp = _smoothstep((r - rc) / w)
    floor = init.floor_density
    mass_floor = trapezoid(floor * (1.0 - ramp) * r**2, r)
    mass_ramp = trapezoid(ramp * r**2, r)
    outer = (1.0 - mass_floor) / mass_ramp
    if not outer > floor:
        raise ConfigError(f"vacuumCore floor {floor} leaves no mass for the exterior")
    return floor + (outer - floor) * ramp


def initial_profile(init: InitialData, p: PhysParams, samples: int = SAMPLES) -> RadialProfile:
    b = p.ball_radius
    r = np.linspace(0.0, b, samples + 1)
    rho = density_profile(init, b, r)
    floor = min(init.density_floor, init.floor_density) if init.kind == "vacuumCore" else init.density_floor
    if np.min(rho) < floor * (1.0 - 1e-12):
        raise ConfigError(f"initial density {np.min(rho):.4g} falls below the floor {floor:.4g}")
    u = init.velocity_amplitude * np.sin(np.pi * r / b)
    u[0] = 0.0
    return RadialProfile(r, rho, u, np.full_like(r, init.temperature))


def initial_state(cfg: ScenarioConfig) -> tuple[FluidState, MassGrid, RadialProfile]:
    prof = initial_profile(cfg.initial_data, cfg.physics)
    if cfg.grid.kind == "radial":
        g = radial_grid(prof, cfg.grid.M)
    else:
        g = MassGrid.uniform(cfg.grid.M)
    s = to_lagrangian(prof, g)
    validate_state(s, g, cfg.physics)
    return s, g, prof
