"""Domain types shared by every module: physical parameters, the mass grid,
fluid states and per-time functional reports.

Conventions used throughout the package
---------------------------------------
The mass coordinate ``h`` runs over ``[0, 1]`` (total mass normalised to one).
Quantities live on a staggered grid:

* nodes ``i = 0..M``: radius ``r_i`` and velocity ``u_i``
* cells ``j = 0..M-1``: specific shell volume ``v_j = r^2 eta = 1/rho`` and
  temperature ``theta_j``

Radii are never integrated independently; they are always rebuilt from the
cell volumes through ``r_i^3 = 3 * sum_{j<i} v_j dh_j``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

RADIUS_RTOL = 1e-10


class ValidationError(ValueError):
    """Raised when parameters or states violate a type invariant."""


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PhysParams:
    """Constant coefficients of the heat-conductive gas.

    ``lam`` is the bulk viscosity (``lambda`` is a keyword). ``cv`` and
    ``dim`` are carried for completeness but only ``cv=1`` and ``dim=3`` are
    accepted by :func:`validate_params`.
    """

    mu: float = 1.0
    lam: float = 0.0
    kappa: float = 1.0
    R: float = 1.0
    ball_radius: float = 3.0 ** (1.0 / 3.0)
    cv: float = 1.0
    dim: int = 3

    @property
    def nu(self) -> float:
        return 2.0 * self.mu + self.lam

    @property
    def gamma(self) -> float:
        return 1.0 + self.R / self.cv


def validate_params(p: PhysParams) -> PhysParams:
    if not p.mu > 0:
        raise ValidationError(f"shear viscosity must be positive (mu={p.mu})")
    if not p.kappa > 0:
        raise ValidationError(f"heat conductivity must be positive (kappa={p.kappa})")
    if p.mu + 0.5 * p.dim * p.lam < 0:
        raise ValidationError(
            f"viscosity constraint violated: mu + (3/2) lambda = {p.mu + 1.5 * p.lam} < 0"
        )
    if not p.R > 0:
        raise ValidationError(f"gas constant must be positive (R={p.R})")
    if not p.ball_radius > 0:
        raise ValidationError(f"ball radius must be positive (b={p.ball_radius})")
    if p.cv != 1.0:
        raise ValidationError(f"only cv = 1 is supported (cv={p.cv})")
    if p.dim != 3:
        raise ValidationError(f"only dim = 3 is supported (dim={p.dim})")
    return p


@dataclass(frozen=True)
class MassGrid:
    """Partition ``0 = h_0 < h_1 < ... < h_M = 1`` of the mass coordinate."""

    nodes: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.nodes, dtype=float)
        if h.ndim != 1 or h.size < 3:
            raise ValidationError("mass grid needs at least two cells")
        if h[0] != 0.0 or h[-1] != 1.0:
            raise ValidationError("mass grid must start at 0 and end at 1 exactly")
        if np.any(np.diff(h) <= 0):
            raise ValidationError("mass grid nodes must be strictly increasing")
        object.__setattr__(self, "nodes", _frozen(h))
        object.__setattr__(self, "_widths", _frozen(np.diff(h)))
        dual = np.empty(h.size)
        w = self._widths
        dual[0] = 0.5 * w[0]
        dual[-1] = 0.5 * w[-1]
        dual[1:-1] = 0.5 * (w[:-1] + w[1:])
        object.__setattr__(self, "_node_masses", _frozen(dual))

    @classmethod
    def uniform(cls, M: int) -> "MassGrid":
        h = np.linspace(0.0, 1.0, M + 1)
        h[0], h[-1] = 0.0, 1.0
        return cls(h)

    @property
    def M(self) -> int:
        return self.nodes.size - 1

    @property
    def widths(self) -> np.ndarray:
        return self._widths

    @property
    def node_masses(self) -> np.ndarray:
        """Mass of the dual cell around each node (half cells at the ends)."""
        return self._node_masses

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.nodes[:-1] + self.nodes[1:])


def radii_from_volume(v: np.ndarray, widths: np.ndarray) -> np.ndarray:
    """Node radii from cell specific volumes: ``r_i^3 = 3 sum_{j<i} v_j dh_j``."""
    cum = np.concatenate(([0.0], np.cumsum(v * widths)))
    return np.cbrt(3.0 * cum)


@dataclass(frozen=True)
class FluidState:
    """Lagrangian state at one instant; arrays are read-only."""

    time: float
    v: np.ndarray
    u: np.ndarray
    theta: np.ndarray
    radii: np.ndarray

    def __post_init__(self):
        for name in ("v", "u", "theta", "radii"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @classmethod
    def from_fields(cls, time, v, u, theta, grid: MassGrid) -> "FluidState":
        v = np.asarray(v, dtype=float)
        return cls(float(time), v, u, theta, radii_from_volume(v, grid.widths))

    @property
    def density(self) -> np.ndarray:
        return 1.0 / self.v

    def replace(self, **changes) -> "FluidState":
        fields = dict(time=self.time, v=self.v, u=self.u, theta=self.theta, radii=self.radii)
        fields.update(changes)
        return FluidState(**fields)


def equilibrium_state(grid: MassGrid, p: PhysParams | None = None, theta: float = 1.0) -> FluidState:
    """Constant state rho = 1, u = 0; requires ``b^3 = 3`` for mass one."""
    M = grid.M
    return FluidState.from_fields(0.0, np.ones(M), np.zeros(M + 1), np.full(M, theta), grid)


def validate_state(s: FluidState, g: MassGrid, p: PhysParams) -> FluidState:
    M = g.M
    if s.v.shape != (M,) or s.theta.shape != (M,) or s.u.shape != (M + 1,) or s.radii.shape != (M + 1,):
        raise ValidationError(
            f"array sizes inconsistent with grid of {M} cells: v{s.v.shape} u{s.u.shape} "
            f"theta{s.theta.shape} radii{s.radii.shape}"
        )
    for name in ("v", "theta"):
        arr = getattr(s, name)
        bad = np.flatnonzero(~(arr > 0))
        if bad.size:
            label = "temperature" if name == "theta" else "shell volume"
            raise ValidationError(f"positivity violated: {label} at cell {int(bad[0])}")
    if not np.all(np.isfinite(s.u)):
        raise ValidationError("velocity not finite")
    if s.u[0] != 0.0 or s.u[-1] != 0.0:
        raise ValidationError(f"boundary velocity nonzero: u[0]={s.u[0]}, u[M]={s.u[-1]}")
    r3 = 3.0 * np.concatenate(([0.0], np.cumsum(s.v * g.widths)))
    scale = max(r3[-1], 1.0)
    err = np.abs(s.radii**3 - r3)
    if s.radii[0] != 0.0 or np.max(err) > RADIUS_RTOL * scale:
        i = int(np.argmax(err))
        raise ValidationError(f"radius inconsistency at node {i}: |r^3 - 3 sum v dh| = {err[i]:.3e}")
    b = p.ball_radius
    if abs(s.radii[-1] - b) > RADIUS_RTOL * b:
        raise ValidationError(f"radius inconsistency: outer radius {s.radii[-1]!r} != ball radius {b!r}")
    return s


@dataclass(frozen=True)
class FunctionalReport:
    """Functionals and monitor values evaluated at one output time."""

    time: float
    energy: float
    dissipation: float
    mass_eta: float
    mass_shell: float
    simple_energy: float
    mean_temp: float
    monitor_center: float
    monitor_rho_max: float
    monitor_rho_inv_max: float
    monitor_u_max: float
    serrin_norm: float
    jensen_margin: float
    entropy_residual: float = 0.0
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dissipation < 0 or not math.isfinite(self.dissipation):
            raise ValidationError(f"dissipation must be nonnegative, got {self.dissipation}")
        if not (self.mass_eta > 0 and self.mass_shell > 0 and self.mean_temp > 0):
            raise ValidationError("mass integrals and mean temperature must be positive")
