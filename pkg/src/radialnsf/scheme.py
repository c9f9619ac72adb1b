"""Staggered Lagrangian discretisation and IMEX time stepping.

Semi-discrete system (nodes ``i``, cells ``j``; ``V_j = v_j dh_j`` is the
shell volume per unit solid angle, ``m_i`` the dual-cell mass)::

    dv_j/dt   = (r^2 u)|_j^{j+1} / dh_j
    du_i/dt   = r_i^2 (S_i - S_{i-1}) / m_i,       S_j = -R theta_j / v_j + nu D_j
    dtheta_j/dt = -R theta_j D_j + Q_j + (F_{j+1} - F_j) / dh_j

with the divergence ``D_j = (r^2 u)|_j^{j+1} / V_j``, the conductive flux
``F_i = kappa r_i^4 / vbar_i * theta_h`` (zero at both ends) and the viscous
heating

    Q_j = (lambda + 2 mu / 3) v_j D_j^2 + (4 mu / 3) v_j s_j^2,
    s_j = sqrt(r_j^3 r_{j+1}^3) (u_{j+1}/r_{j+1} - u_j/r_j) / V_j.

``s_j`` is the cell value of ``u_r - u/r``. It is built so that
``V_j (D_j^2 - s_j^2) = 3 (r u^2)|_j^{j+1}`` holds exactly, which makes the
heating equal to ``nu v D^2 - 4 mu (r u^2)_h`` cell by cell: the total heat
released matches the viscous work and the total energy
``sum m u^2/2 + sum dh theta`` is conserved to round-off. Writing
``b_j = (D_j - s_j)/3`` (cell ``u/r``) and ``a_j = D_j - 2 b_j`` (cell
``u_r``) gives the other familiar form ``lambda v D^2 + 2 mu v (a^2 + 2 b^2)``.
In the first cell ``s_0 = 0`` and ``b_0 = u_1 / r_1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from .core import FluidState, MassGrid, PhysParams, ValidationError


class PositivityLost(RuntimeError):
    """A step produced a shell volume or temperature below the floor."""


class DtUnderflow(RuntimeError):
    """The stability estimate fell below ``dt_min``."""


class SingularTridiagonal(RuntimeError):
    pass


@dataclass(frozen=True)
class SchemeConfig:
    theta_implicit: float = 1.0
    cfl_safety: float = 0.5
    dt_min: float = 1e-10
    dt_max: float = 1e-3
    positivity_floor: float = 1e-12

    def __post_init__(self):
        if not 0.5 <= self.theta_implicit <= 1.0:
            raise ValidationError("theta_implicit must lie in [1/2, 1]")
        if not 0.0 < self.cfl_safety < 1.0:
            raise ValidationError("cfl_safety must lie in (0, 1)")
        if not 0.0 < self.dt_min <= self.dt_max:
            raise ValidationError("need 0 < dt_min <= dt_max")
        if not self.positivity_floor > 0:
            raise ValidationError("positivity_floor must be positive")


# Source callable for manufactured solutions: t -> (S_v cells, S_u nodes, S_theta cells).
Source = Callable[[float], tuple]


@dataclass(frozen=True)
class Geometry:
    """Node radii and derived metric arrays of one state."""

    r: np.ndarray
    r2: np.ndarray
    r3: np.ndarray
    vol: np.ndarray
    dh: np.ndarray
    m: np.ndarray

    @classmethod
    def of(cls, s: FluidState, g: MassGrid) -> "Geometry":
        vol = s.v * g.widths
        r3 = 3.0 * np.concatenate(([0.0], np.cumsum(vol)))
        r = s.radii
        return cls(r, r * r, r3, vol, g.widths, g.node_masses)


def divergence(u: np.ndarray, geo: Geometry) -> np.ndarray:
    """Cell divergence ``(r^2 u)_h / v``; the shell average of ``div U``."""
    flux = geo.r2 * u
    return (flux[1:] - flux[:-1]) / geo.vol


def shear_rate(u: np.ndarray, geo: Geometry) -> np.ndarray:
    """Cell value of ``u_r - u/r`` (zero in the central ball)."""
    w = np.zeros_like(u)
    w[1:] = u[1:] / geo.r[1:]
    return np.sqrt(geo.r3[:-1] * geo.r3[1:]) * (w[1:] - w[:-1]) / geo.vol


def strain_components(u: np.ndarray, geo: Geometry):
    """Cell values ``(D, u_r, u/r)`` with ``D = u_r + 2 u/r`` exactly."""
    D = divergence(u, geo)
    b = (D - shear_rate(u, geo)) / 3.0
    return D, D - 2.0 * b, b


def viscous_heating(u: np.ndarray, v: np.ndarray, geo: Geometry, p: PhysParams) -> np.ndarray:
    """Heating per unit mass, a sum of two squares with nonnegative weights."""
    D = divergence(u, geo)
    s = shear_rate(u, geo)
    return (p.lam + 2.0 * p.mu / 3.0) * v * D * D + (4.0 * p.mu / 3.0) * v * s * s


def conductances(geo: Geometry, p: PhysParams) -> np.ndarray:
    """``c_i`` with ``F_i = c_i (theta_i - theta_{i-1})``; zero at both ends."""
    c = np.zeros(geo.r.size)
    r4 = geo.r2[1:-1] ** 2
    c[1:-1] = 2.0 * p.kappa * r4 / (geo.vol[:-1] + geo.vol[1:])
    return c


def _conduction(theta: np.ndarray, c: np.ndarray, dh: np.ndarray) -> np.ndarray:
    F = np.zeros(c.size)
    F[1:-1] = c[1:-1] * (theta[1:] - theta[:-1])
    return (F[1:] - F[:-1]) / dh


def stress(s: FluidState, geo: Geometry, p: PhysParams, u=None) -> np.ndarray:
    u = s.u if u is None else u
    return -p.R * s.theta / s.v + p.nu * divergence(u, geo)


def continuity_rhs(s: FluidState, g: MassGrid) -> np.ndarray:
    flux = s.radii**2 * s.u
    return (flux[1:] - flux[:-1]) / g.widths


def momentum_rhs(s: FluidState, g: MassGrid, p: PhysParams) -> np.ndarray:
    geo = Geometry.of(s, g)
    S = stress(s, geo, p)
    rate = np.zeros_like(s.u)
    rate[1:-1] = geo.r2[1:-1] * (S[1:] - S[:-1]) / geo.m[1:-1]
    return rate


def temperature_rhs(s: FluidState, g: MassGrid, p: PhysParams) -> np.ndarray:
    geo = Geometry.of(s, g)
    D = divergence(s.u, geo)
    return (-p.R * s.theta * D + viscous_heating(s.u, s.v, geo, p)
            + _conduction(s.theta, conductances(geo, p), geo.dh))


def _solve_tridiagonal(lower, diag, upper, rhs):
    """``lower[k]`` multiplies ``x[k-1]`` and ``upper[k]`` multiplies ``x[k+1]``."""
    n = diag.size
    ab = np.zeros((3, n))
    ab[0, 1:] = upper[:-1]
    ab[1] = diag
    ab[2, :-1] = lower[1:]
    try:
        x = solve_banded((1, 1), ab, rhs, check_finite=False)
    except (LinAlgError, ValueError) as exc:
        raise SingularTridiagonal(f"singular tridiagonal: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise SingularTridiagonal("singular tridiagonal: non-finite solution")
    return x


def step(s: FluidState, g: MassGrid, p: PhysParams, cfg: SchemeConfig, dt: float,
         source: Source | None = None) -> FluidState:
    """Advance one step of size ``dt``.

    Viscous and conductive terms use the weight ``tau = cfg.theta_implicit``;
    pressure and geometry are frozen at the old time. The kinetic energy lost
    by the implicit weighting, ``(tau - 1/2) m du^2``, is returned to the
    adjacent cells as heat so the energy budget closes exactly.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    tau = cfg.theta_implicit
    geo = Geometry.of(s, g)
    u, v, th = s.u, s.v, s.theta
    nu = p.nu
    r2, m, vol = geo.r2, geo.m, geo.vol

    if source is not None:
        src_v, src_u, src_th = source(s.time + tau * dt)
    else:
        src_v = src_u = src_th = 0.0

    # momentum: solve for the increment so exact equilibria stay exact
    S_old = stress(s, geo, p)
    rhs = dt * r2[1:-1] * (S_old[1:] - S_old[:-1])
    if source is not None:
        rhs = rhs + dt * m[1:-1] * np.asarray(src_u)[1:-1]
    a = dt * nu * tau
    diag = m[1:-1] + a * r2[1:-1] ** 2 * (1.0 / vol[1:] + 1.0 / vol[:-1])
    upper = -a * r2[1:-1] * r2[2:] / vol[1:]
    lower = -a * r2[1:-1] * r2[:-2] / vol[:-1]
    du = np.zeros_like(u)
    du[1:-1] = _solve_tridiagonal(lower, diag, upper, rhs)
    u_new = u + du
    u_tau = u + tau * du

    D = divergence(u_tau, geo)
    heat = viscous_heating(u_tau, v, geo, p)
    defect = (tau - 0.5) * 0.5 * (du[:-1] ** 2 + du[1:] ** 2)

    # temperature: implicit conduction, again for the increment
    c = conductances(geo, p)
    dh = geo.dh
    rhs_t = dh * (dt * (-p.R * th * D + heat + src_th + _conduction(th, c, dh)) + defect)
    b_t = dt * tau
    diag_t = dh + b_t * (c[:-1] + c[1:])
    upper_t = -b_t * c[1:]
    lower_t = -b_t * c[:-1]
    th_new = th + _solve_tridiagonal(lower_t, diag_t, upper_t, rhs_t)

    flux = r2 * u_tau
    v_new = v + dt * (flux[1:] - flux[:-1]) / dh + dt * src_v

    floor = cfg.positivity_floor
    if not (np.all(v_new > floor) and np.all(np.isfinite(v_new))):
        j = int(np.argmin(np.where(np.isfinite(v_new), v_new, -np.inf)))
        raise PositivityLost(f"positivity lost: shell volume {v_new[j]:.3e} at cell {j}")
    if not (np.all(th_new > floor) and np.all(np.isfinite(th_new))):
        j = int(np.argmin(np.where(np.isfinite(th_new), th_new, -np.inf)))
        raise PositivityLost(f"positivity lost: temperature {th_new[j]:.3e} at cell {j}")
    u_new[0] = u_new[-1] = 0.0
    return FluidState.from_fields(s.time + dt, v_new, u_new, th_new, g)


def stability_estimates(s: FluidState, g: MassGrid, p: PhysParams) -> tuple[float, float]:
    """Acoustic crossing time and the time scale of the explicit sources."""
    geo = Geometry.of(s, g)
    dr = np.diff(geo.r)
    sound = np.sqrt(p.gamma * p.R * s.theta)
    t_acoustic = float(np.min(dr / sound))
    D = divergence(s.u, geo)
    rate = np.abs(D) + viscous_heating(s.u, s.v, geo, p) / s.theta
    peak = float(np.max(rate))
    t_explicit = math.inf if peak == 0.0 else 1.0 / peak
    return t_acoustic, t_explicit


def adaptive_dt(s: FluidState, g: MassGrid, p: PhysParams, cfg: SchemeConfig) -> float:
    t_ac, t_ex = stability_estimates(s, g, p)
    dt = cfg.cfl_safety * min(t_ac, t_ex)
    if dt < cfg.dt_min:
        raise DtUnderflow(f"dt underflow: stability estimate {dt:.3e} < dt_min {cfg.dt_min:.3e}")
    return min(dt, cfg.dt_max)
