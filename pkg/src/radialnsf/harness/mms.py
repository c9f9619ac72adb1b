"""Manufactured-solution convergence study.

Analytic fields in ``(t, h)`` with ``g(t) = 1 + a t``::

    v* = 1 + eps g cos(pi h),  theta* = 1 + eps g cos(pi h),  u* = eps g sin(pi h)

so ``u*`` vanishes at both ends, ``theta*_h`` vanishes at both ends and
``int v* dh = 1`` keeps the ball radius fixed. Radii follow from
``r*^3 = 3 int_0^h v* = 3h + 3 eps g sin(pi h) / pi``. Sources are obtained by
substituting into the mass-coordinate system with sympy.

The continuity source is applied as an exact cell average so its mass
integral telescopes to zero and the outer radius stays at ``b`` to round-off.
Nodes sit at equally spaced initial radii (the analogue of
:func:`~radialnsf.lagrange.radial_grid`), which keeps the truncation error
smooth near the centre. Time steps shrink like ``1/M^2`` so the first-order
time error refines at the same rate as the spatial one.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
import sympy as sp
from scipy.optimize import brentq

from ..core import FluidState, MassGrid, PhysParams, validate_state
from ..scheme import SchemeConfig, step
from .config import MMSConfig


def _broadcasting(f):
    # constant expressions lambdify to scalars; always return an array shaped like h
    return lambda t, h: np.broadcast_to(np.asarray(f(t, h), dtype=float), np.shape(h)).copy()


@dataclass(frozen=True)
class ManufacturedSolution:
    eps: float
    ramp: float
    p: PhysParams

    def __post_init__(self):
        t, h = sp.symbols("t h", real=True)
        p = self.p
        eps, a = sp.Float(self.eps), sp.Float(self.ramp)
        g = 1 + a * t
        v = 1 + eps * g * sp.cos(sp.pi * h)
        th = 1 + eps * g * sp.cos(sp.pi * h)
        u = eps * g * sp.sin(sp.pi * h)
        r3 = 3 * h + 3 * eps * g * sp.sin(sp.pi * h) / sp.pi
        r = sp.cbrt(r3)
        flux = r**2 * u
        D = sp.diff(flux, h) / v
        sigma = -p.R * th / v + p.nu * D
        S_u = sp.diff(u, t) - r**2 * sp.diff(sigma, h)
        shear = r3 * sp.diff(u / r, h) / v  # u_r - u/r
        heat = (p.lam + sp.Rational(2, 3) * p.mu) * v * D**2 + sp.Rational(4, 3) * p.mu * v * shear**2
        cond = sp.diff(p.kappa * r**4 * sp.diff(th, h) / v, h)
        S_th = sp.diff(th, t) + p.R * th * D - heat - cond
        # cell averages of v*, theta* and of v*_t need the antiderivative of cos(pi h)
        prim = eps * g * sp.sin(sp.pi * h) / sp.pi
        lam = lambda e: _broadcasting(sp.lambdify((t, h), e, "numpy"))
        object.__setattr__(self, "_u", lam(u))
        object.__setattr__(self, "_flux", lam(flux))
        object.__setattr__(self, "_prim", lam(prim))
        object.__setattr__(self, "_prim_t", lam(sp.diff(prim, t)))
        object.__setattr__(self, "_S_u", lam(S_u))
        object.__setattr__(self, "_S_th", lam(S_th))
        object.__setattr__(self, "_r3", lam(r3))

    def cell_average(self, t, g: MassGrid) -> np.ndarray:
        """Exact cell average of ``v*`` (identical to that of ``theta*``)."""
        P = self._prim(t, g.nodes)
        return 1.0 + np.diff(P) / g.widths

    def velocity(self, t, g: MassGrid) -> np.ndarray:
        u = self._u(t, g.nodes)
        u[0] = u[-1] = 0.0
        return u

    def state(self, t, g: MassGrid) -> FluidState:
        v = self.cell_average(t, g)
        return FluidState.from_fields(t, v, self.velocity(t, g), v.copy(), g)

    def source(self, g: MassGrid):
        h, c = g.nodes, g.centers
        inner = h[1:-1]

        def src(t):
            flux = self._flux(t, h)
            flux[0] = 0.0
            s_v = (np.diff(self._prim_t(t, h)) - np.diff(flux)) / g.widths
            s_u = np.zeros(h.size)
            s_u[1:-1] = self._S_u(t, inner)
            s_th = self._S_th(t, c)
            return s_v, s_u, s_th

        return src

    def radial_nodes(self, M: int) -> MassGrid:
        """Mass nodes at equally spaced initial radii ``i b / M``."""
        b3 = 3.0
        targets = b3 * (np.arange(M + 1) / M) ** 3
        h = np.empty(M + 1)
        h[0], h[-1] = 0.0, 1.0
        for i in range(1, M):
            h[i] = brentq(lambda x: float(self._r3(0.0, x)) - targets[i], 0.0, 1.0, xtol=1e-300, rtol=1e-15)
        return MassGrid(h)


@dataclass(frozen=True)
class MMSRow:
    M: int
    dt: float
    steps: int
    error_v: float
    error_u: float
    error_theta: float
    seconds: float

    @property
    def error(self) -> float:
        return max(self.error_v, self.error_u, self.error_theta)


def _run_one(sol: ManufacturedSolution, M: int, dt: float, T: float, p: PhysParams,
             sc: SchemeConfig) -> MMSRow:
    g = sol.radial_nodes(M)
    s = sol.state(0.0, g)
    src = sol.source(g)
    n = int(round(T / dt))
    dt = T / n
    t0 = time.perf_counter()
    for k in range(n):
        s = step(s, g, p, sc, dt, source=src)
    s = s.replace(time=T)
    elapsed = time.perf_counter() - t0
    validate_state(s, g, p)
    ref = sol.state(T, g)
    return MMSRow(M, dt, n, float(np.abs(s.v - ref.v).max()), float(np.abs(s.u - ref.u).max()),
                  float(np.abs(s.theta - ref.theta).max()), elapsed)


def observed_orders(rows) -> list[float]:
    out = []
    for a, b in zip(rows[:-1], rows[1:]):
        out.append(math.log(a.error / b.error) / math.log(b.M / a.M))
    return out


def run_mms(mc: MMSConfig | None = None, p: PhysParams | None = None,
            scheme: SchemeConfig | None = None, dt_scale: float = 1.0) -> list[MMSRow]:
    """Convergence table over ``mc.sizes``; ``dt_scale`` multiplies every dt."""
    mc = mc or MMSConfig()
    p = p or PhysParams()
    sc = scheme or SchemeConfig()
    if abs(p.ball_radius**3 - 3.0) > 1e-12:
        raise ValueError("manufactured fields carry unit mass only for b^3 = 3")
    sol = ManufacturedSolution(mc.epsilon, mc.ramp, p)
    M0 = min(mc.sizes)
    rows = []
    for M in sorted(mc.sizes):
        dt = dt_scale * mc.dt_coarse * (M0 / M) ** 2
        rows.append(_run_one(sol, M, dt, mc.end_time, p, sc))
    return rows


def format_table(rows) -> str:
    orders = [math.nan] + observed_orders(rows)
    lines = [f"{'M':>6} {'dt':>10} {'steps':>7} {'err_v':>11} {'err_u':>11} {'err_theta':>11} {'order':>6} {'sec':>7}"]
    for r, o in zip(rows, orders):
        lines.append(f"{r.M:>6d} {r.dt:>10.3e} {r.steps:>7d} {r.error_v:>11.4e} {r.error_u:>11.4e} "
                     f"{r.error_theta:>11.4e} {o:>6.3f} {r.seconds:>7.2f}")
    return "\n".join(lines)
