"""Functionals, conservation identities, Jensen radius margins and blowup
monitors evaluated on states and trajectories.

Integrals are sums over cells; node quantities enter through their squares
averaged onto cells, which is the same as weighting nodes by their dual-cell
mass. With that convention the functionals are the ones the scheme balances
exactly in space, so what remains in the entropy budget is time-stepping
error only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import FluidState, MassGrid, PhysParams, ValidationError
from .scheme import Geometry, conductances, viscous_heating


def phi(x):
    """``x - log x - 1``; nonnegative, zero only at ``x = 1``."""
    return x - np.log(x) - 1.0


def G(s):
    """``s log s - s + 1`` with ``G(0) = 1``."""
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(s > 0, s * np.log(np.where(s > 0, s, 1.0)) - s + 1.0, 1.0)
    return out if out.ndim else float(out)


def kinetic_energy(s: FluidState, g: MassGrid) -> float:
    return float(np.sum(g.node_masses * s.u**2) / 2.0)


def energy_functional(s: FluidState, g: MassGrid, p: PhysParams) -> float:
    return kinetic_energy(s, g) + float(np.sum(g.widths * (p.R * phi(s.v) + phi(s.theta))))


def dissipation_parts(s: FluidState, g: MassGrid, p: PhysParams) -> tuple[float, float]:
    """Viscous and conductive parts of the entropy production."""
    geo = Geometry.of(s, g)
    viscous = float(np.sum(g.widths * viscous_heating(s.u, s.v, geo, p) / s.theta))
    c = conductances(geo, p)
    th = s.theta
    conductive = float(np.sum(c[1:-1] * (th[1:] - th[:-1]) ** 2 / (th[1:] * th[:-1])))
    return viscous, conductive


def dissipation_functional(s: FluidState, g: MassGrid, p: PhysParams) -> float:
    return sum(dissipation_parts(s, g, p))


def simple_energy(s: FluidState, g: MassGrid) -> float:
    return kinetic_energy(s, g) + float(np.sum(g.widths * s.theta))


def mass_shell(s: FluidState, g: MassGrid) -> float:
    """Integral of ``r^2 eta = v``; equals ``b^3 / 3``."""
    return float(np.sum(s.v * g.widths))


def mass_eta(s: FluidState) -> float:
    """Integral of ``eta = r_h`` over each cell, i.e. the outer radius."""
    return float(np.sum(np.diff(s.radii)))


def mean_temperature(s: FluidState, g: MassGrid) -> float:
    return float(np.sum(g.widths * s.theta))


@dataclass(frozen=True)
class EntropyBalance:
    times: np.ndarray
    energy: np.ndarray
    dissipated: np.ndarray
    residual: np.ndarray

    @property
    def relative(self) -> np.ndarray:
        return self.residual / (self.energy[0] + 1.0)


def entropy_balance_residual(times, energies, dissipations) -> EntropyBalance:
    """``E(t) + int_0^t V - E(0)`` with the time integral by the trapezoid rule.

    Pass every accepted step for a faithful integral; output-interval samples
    give a coarser quadrature of the same budget.
    """
    t = np.asarray(times, dtype=float)
    E = np.asarray(energies, dtype=float)
    V = np.asarray(dissipations, dtype=float)
    if np.any(V < 0):
        raise ValidationError("dissipation must be nonnegative")
    acc = np.concatenate(([0.0], np.cumsum(0.5 * (V[1:] + V[:-1]) * np.diff(t))))
    return EntropyBalance(t, E, acc, E + acc - E[0])


@dataclass(frozen=True)
class JensenMargins:
    """``rhs - lhs`` of the two Jensen inequalities at interior nodes."""

    nodes: np.ndarray
    interior: np.ndarray
    exterior: np.ndarray

    @property
    def minimum(self) -> float:
        return float(min(self.interior.min(), self.exterior.min()))


def jensen_radius_check(s: FluidState, g: MassGrid) -> JensenMargins:
    """Jensen margins for the ball ``B_r`` and its complement, node by node.

    With volume weights ``V_j = v_j dh_j`` the mean density inside node ``i``
    is ``h_i / (r_i^3 / 3)`` and the mean of ``G(rho)`` is
    ``sum G(1/v_j) V_j / sum V_j``; both sides are volume averages over the
    same discrete measure, so the margin is nonnegative up to round-off.
    """
    vol = s.v * g.widths
    Gv = G(1.0 / s.v) * vol
    inner_vol = np.cumsum(vol)[:-1]
    inner_G = np.cumsum(Gv)[:-1]
    outer_vol = np.cumsum(vol[::-1])[::-1][1:]
    outer_G = np.cumsum(Gv[::-1])[::-1][1:]
    h = g.nodes[1:-1]
    interior = inner_G / inner_vol - G(h / inner_vol)
    exterior = outer_G / outer_vol - G((1.0 - h) / outer_vol)
    return JensenMargins(h, interior, exterior)


def jensen_radius_bounds(h, budget: float, b: float, iters: int = 200):
    """Smallest and largest radius compatible with an entropy budget.

    ``budget`` bounds ``int G(rho) dx`` per unit solid angle, which equals
    ``int (v - log v - 1) dh <= E / R``. The returned radii satisfy
    ``G(3h/r^3) r^3 / 3 <= budget`` and the analogous condition on the
    complement. These stand in for the existential lower bounds on ``r`` and
    ``b^3 - r^3``.
    """
    h = np.atleast_1d(np.asarray(h, dtype=float))
    b3 = b**3

    def excess_inner(r3):
        return (r3 / 3.0) * G(3.0 * h / r3) - budget

    def excess_outer(r3):
        w = b3 - r3
        return (w / 3.0) * G(3.0 * (1.0 - h) / w) - budget

    # inner: admissible set is [r3_min, 3h]
    lo, hi = np.zeros_like(h) + 1e-300, 3.0 * h
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        bad = excess_inner(mid) > 0
        lo = np.where(bad, mid, lo)
        hi = np.where(bad, hi, mid)
    r_min = np.cbrt(hi)
    # outer: admissible set is [3h, r3_max]
    lo, hi = 3.0 * h, np.full_like(h, b3) - 1e-300 * b3
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        bad = excess_outer(mid) > 0
        hi = np.where(bad, mid, hi)
        lo = np.where(bad, lo, mid)
    r_max = np.cbrt(lo)
    return r_min, r_max


@dataclass(frozen=True)
class MonitorConfig:
    core_mass: float = 0.05
    interior_mass: float | None = None
    serrin_exponents: tuple[float, float] = (2.0, math.inf)
    serrin_global: bool = False
    window_start: float = 0.0

    def __post_init__(self):
        h0 = self.core_mass / 2.0 if self.interior_mass is None else self.interior_mass
        object.__setattr__(self, "interior_mass", float(h0))
        if not 0.0 < h0 < self.core_mass < 1.0:
            raise ValidationError("need 0 < interior_mass < core_mass < 1")
        r, s = self.serrin_exponents
        if r < 2.0 or s <= 0:
            raise ValidationError("Serrin exponents need r >= 2 and s > 0")
        if self.serrin_global and 2.0 / r + 3.0 / s > 1.0:
            raise ValidationError(f"exponent constraint violated: 2/r + 3/s = {2 / r + 3 / s:.4g} > 1")


def core_cells(g: MassGrid, core_mass: float) -> int:
    """Number of cells lying entirely within ``h <= core_mass`` (at least one)."""
    return max(1, int(np.count_nonzero(g.nodes[1:] <= core_mass * (1.0 + 1e-12))))


@dataclass(frozen=True)
class CoreMonitor:
    total: float
    rho_max: float
    rho_inv_max: float
    u_max: float


def blowup_monitor(s: FluidState, g: MassGrid, cfg: MonitorConfig) -> CoreMonitor:
    n = core_cells(g, cfg.core_mass)
    rho = 1.0 / s.v[:n]
    rho_max = float(rho.max())
    rho_inv_max = float(s.v[:n].max())
    u_max = float(np.abs(s.u[: n + 1]).max())
    return CoreMonitor(rho_max + rho_inv_max + u_max, rho_max, rho_inv_max, u_max)


def velocity_norm(s: FluidState, g: MassGrid, exponent: float, core_mass: float | None = None) -> float:
    """``||U||_{L^s}`` over the ball, or ``||U||_{L^inf}`` on the core nodes."""
    if core_mass is not None:
        n = core_cells(g, core_mass)
        return float(np.abs(s.u[: n + 1]).max())
    if math.isinf(exponent):
        return float(np.abs(s.u).max())
    au = np.abs(s.u) ** exponent
    vol = s.v * g.widths
    return float((4.0 * math.pi * np.sum(vol * 0.5 * (au[1:] + au[:-1]))) ** (1.0 / exponent))


@dataclass
class SerrinAccumulator:
    """Running ``sup rho`` plus ``int ||U||^r dt`` from ``window_start`` on.

    The default exponents ``(2, inf)`` with ``serrin_global=False`` give the
    localised variant: L^2 in time of the sup of ``|u|`` over the core.
    """

    g: MassGrid
    cfg: MonitorConfig
    rho_part: float = 0.0
    velocity_part: float = 0.0
    _last: tuple | None = None

    def update(self, t: float, s: FluidState) -> None:
        self.rho_part = max(self.rho_part, float((1.0 / s.v).max()))
        r, sx = self.cfg.serrin_exponents
        core = None if self.cfg.serrin_global else self.cfg.core_mass
        norm = velocity_norm(s, self.g, sx, core)
        if math.isinf(r):
            if t >= self.cfg.window_start:
                self.velocity_part = max(self.velocity_part, norm)
            return
        val = norm**r
        if self._last is not None:
            t0, v0 = self._last
            lo = max(t0, self.cfg.window_start)
            if t > lo:
                frac = (lo - t0) / (t - t0)
                v_lo = v0 + frac * (val - v0)
                self.velocity_part += 0.5 * (v_lo + val) * (t - lo)
        self._last = (t, val)

    @property
    def total(self) -> float:
        return self.rho_part + self.velocity_part


def serrin_norm(times, states, g: MassGrid, cfg: MonitorConfig) -> SerrinAccumulator:
    acc = SerrinAccumulator(g, cfg)
    for t, s in zip(times, states):
        acc.update(t, s)
    return acc


def _mean_temperature_floor(s0: FluidState, g: MassGrid, p: PhysParams) -> float:
    total_v = float(np.sum(g.widths * s0.v))
    return float(np.sum(g.widths * (np.log(s0.theta) + p.R * np.log(s0.v)))) - p.R * math.log(total_v)


@dataclass
class InteriorMonitor:
    """Quantities bounded away from the centre, measured over ``h >= interior_mass``.

    Everything is recorded as a measured value; no bound is asserted.
    """

    g: MassGrid
    p: PhysParams
    cfg: MonitorConfig
    initial: FluidState
    rho_min: float = math.inf
    rho_max: float = 0.0
    velocity_accumulator: float = 0.0
    temperature_ratio: float = 0.0
    velocity_ratio: float = 0.0
    mean_temp_margin: float = math.inf
    mean_temp_series: list = field(default_factory=list)
    _last: tuple | None = None

    def __post_init__(self):
        h0 = self.cfg.interior_mass
        self._cells = self.g.centers >= h0
        self._nodes = self.g.nodes >= h0
        self._floor = _mean_temperature_floor(self.initial, self.g, self.p)

    def update(self, t: float, s: FluidState, V: float) -> None:
        v = s.v[self._cells]
        self.rho_min = min(self.rho_min, float((1.0 / v).min()))
        self.rho_max = max(self.rho_max, float((1.0 / v).max()))
        mean_t = mean_temperature(s, self.g)
        self.mean_temp_series.append((t, mean_t))
        self.mean_temp_margin = min(self.mean_temp_margin, math.log(mean_t) - self._floor)
        u2 = float((s.u[self._nodes] ** 2).max())
        if self._last is not None:
            t0, a0 = self._last
            self.velocity_accumulator += 0.5 * (a0 + u2) * (t - t0)
        self._last = (t, u2)
        th = float(s.theta[self._cells].max())
        self.temperature_ratio = max(self.temperature_ratio, th / (1.0 + float(v.max()) * V))
        if V > 1e-300:
            w = s.u[self._nodes] / s.radii[self._nodes]
            self.velocity_ratio = max(self.velocity_ratio, float((w**2).max()) / V)

    def summary(self) -> dict:
        return {
            "rho_min": self.rho_min,
            "rho_max": self.rho_max,
            "mean_temp_min": min(m for _, m in self.mean_temp_series),
            "mean_temp_max": max(m for _, m in self.mean_temp_series),
            "velocity_accumulator": self.velocity_accumulator,
            "temperature_ratio": self.temperature_ratio,
            "velocity_ratio": self.velocity_ratio,
            "mean_temp_margin": self.mean_temp_margin,
        }


def interior_monitors(times, states, dissipations, g: MassGrid, p: PhysParams,
                      cfg: MonitorConfig) -> InteriorMonitor:
    mon = InteriorMonitor(g, p, cfg, states[0])
    for t, s, V in zip(times, states, dissipations):
        mon.update(t, s, V)
    return mon
