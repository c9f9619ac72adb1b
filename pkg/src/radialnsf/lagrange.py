"""Maps between Eulerian radial profiles and Lagrangian mass-coordinate states."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid
from scipy.interpolate import PchipInterpolator

from .core import FluidState, MassGrid, ValidationError, radii_from_volume

MASS_TOL = 1e-8


@dataclass(frozen=True)
class RadialProfile:
    """Samples of density, velocity and temperature on ``0 = r_0 < ... < r_K = b``."""

    radii: np.ndarray
    density: np.ndarray
    velocity: np.ndarray
    temperature: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        if r[0] != 0.0 or np.any(np.diff(r) <= 0):
            raise ValidationError("profile radii must start at 0 and increase strictly")
        for name in ("density", "velocity", "temperature"):
            a = np.asarray(getattr(self, name), dtype=float)
            if a.shape != r.shape:
                raise ValidationError(f"profile {name} has shape {a.shape}, radii {r.shape}")
            object.__setattr__(self, name, a)
        object.__setattr__(self, "radii", r)
        if np.any(self.density <= 0):
            raise ValidationError("positivity violated: density")
        if np.any(self.temperature <= 0):
            raise ValidationError("positivity violated: temperature")
        if self.velocity[0] != 0.0:
            raise ValidationError("velocity must vanish at the center")

    @classmethod
    def sample(cls, density, velocity, temperature, b: float, K: int = 20000) -> "RadialProfile":
        """Tabulate callables of ``r`` on ``K + 1`` equally spaced radii."""
        r = np.linspace(0.0, b, K + 1)
        u = np.asarray(velocity(r), dtype=float) * np.ones_like(r)
        u[0] = 0.0
        return cls(r, np.asarray(density(r), dtype=float) * np.ones_like(r), u,
                   np.asarray(temperature(r), dtype=float) * np.ones_like(r))

    @property
    def ball_radius(self) -> float:
        return float(self.radii[-1])

    def mass(self) -> float:
        return float(trapezoid(self.density * self.radii**2, self.radii))


@dataclass(frozen=True)
class EulerianProfile:
    """Eulerian view of a state: node quantities at node radii, cell
    quantities at the mass-centre radius of each shell."""

    node_radii: np.ndarray
    velocity: np.ndarray
    cell_radii: np.ndarray
    density: np.ndarray
    temperature: np.ndarray


def _mass_function(prof: RadialProfile, normalize: bool, tol: float):
    r = prof.radii
    H = cumulative_trapezoid(prof.density * r**2, r, initial=0.0)
    total = H[-1]
    if abs(total - 1.0) > tol:
        if not normalize:
            raise ValidationError(f"mass not normalized: int rho r^2 dr = {total!r}")
    return H / total, total


def _invert_monotone(interp: PchipInterpolator, r: np.ndarray, H: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Solve ``interp(x) = target`` by bisection inside the bracketing sample interval."""
    k = np.clip(np.searchsorted(H, targets, side="right") - 1, 0, r.size - 2)
    lo, hi = r[k].copy(), r[k + 1].copy()
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        below = interp(mid) < targets
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def node_radii_for_masses(prof: RadialProfile, h: np.ndarray, normalize: bool = True,
                          tol: float = MASS_TOL) -> np.ndarray:
    H, _ = _mass_function(prof, normalize, tol)
    interp = PchipInterpolator(prof.radii, H)
    r = _invert_monotone(interp, prof.radii, H, np.asarray(h, dtype=float))
    r[np.asarray(h) == 0.0] = 0.0
    r[np.asarray(h) == 1.0] = prof.ball_radius
    return r


def to_lagrangian(prof: RadialProfile, g: MassGrid, normalize: bool = True,
                  tol: float = MASS_TOL) -> FluidState:
    """Lagrangian state on ``g`` carrying exactly ``dh_j`` of mass in cell ``j``.

    Shell volumes are the exact volumes between the inverted node radii, so
    the radii rebuilt from ``v`` coincide with the inverted radii. The cell
    temperature is the mass average over the shell.
    """
    H, total = _mass_function(prof, normalize, tol)
    rho = prof.density / total
    r_s = prof.radii
    mass_interp = PchipInterpolator(r_s, H)
    r_nodes = _invert_monotone(mass_interp, r_s, H, g.nodes)
    r_nodes[0], r_nodes[-1] = 0.0, prof.ball_radius

    v = (r_nodes[1:] ** 3 - r_nodes[:-1] ** 3) / (3.0 * g.widths)

    heat = cumulative_trapezoid(prof.temperature * rho * r_s**2, r_s, initial=0.0)
    heat_nodes = PchipInterpolator(r_s, heat)(r_nodes)
    theta = np.diff(heat_nodes) / g.widths

    u = np.interp(r_nodes, r_s, prof.velocity)
    u[0] = u[-1] = 0.0
    return FluidState(0.0, v, u, theta, radii_from_volume(v, g.widths))


def reconstruct_radii(s: FluidState, g: MassGrid) -> np.ndarray:
    return radii_from_volume(s.v, g.widths)


def cell_center_radii(radii: np.ndarray) -> np.ndarray:
    """Radius enclosing half of each shell's volume (its mass centre)."""
    return np.cbrt(0.5 * (radii[:-1] ** 3 + radii[1:] ** 3))


def to_eulerian(s: FluidState, g: MassGrid) -> EulerianProfile:
    r = reconstruct_radii(s, g)
    return EulerianProfile(r, s.u.copy(), cell_center_radii(r), 1.0 / s.v, s.theta.copy())


def radial_grid(prof: RadialProfile, M: int, normalize: bool = True) -> MassGrid:
    """Mass grid whose nodes sit at ``M`` equally spaced radii of ``prof``.

    Near the centre a uniform mass grid has shells of very uneven radial
    width; this grid keeps the initial radial spacing uniform instead.
    """
    H, _ = _mass_function(prof, normalize, MASS_TOL)
    targets = np.linspace(0.0, prof.ball_radius, M + 1)
    h = PchipInterpolator(prof.radii, H)(targets)
    h[0], h[-1] = 0.0, 1.0
    return MassGrid(h)
